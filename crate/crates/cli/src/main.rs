//! `nullflow`: simulate null mean curvature flow, check the closed-form laws,
//! sweep initial data, dump exact profiles and export Kruskal-type charts.
//!
//! Exit codes: 0 success, 1 failed check or computation, 2 usage error.
//! Failures print a JSON error object on stderr.

mod config;
mod exact;
mod kruskal_cmd;
mod provenance;
mod simulate;
mod sweep;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use nullflow::exact_solutions::AncientKind;
use nullflow::verify::run_suite;
use nullflow::{Suite, VerifyOptions};

use config::{ModelSpec, Overrides, RunConfig};
use exact::ExactRequest;
use kruskal_cmd::{parse_term, ChartRequest, ProfileSpec};
use provenance::config_hash;
use sweep::{Parameter, SweepArgs};

/// Marks an error caused by the invocation rather than the computation.
#[derive(Debug)]
pub struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Parser)]
#[command(name = "nullflow", version, about = "Null mean curvature flow along shear-free lightcones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow from one initial cross section.
    Simulate {
        /// JSON run configuration; flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a named self-check suite and print a JSON report.
    Verify {
        /// area-law, rescaling, ancient, kruskal, geometry, or all.
        suite: String,
        #[arg(long, default_value_t = 64)]
        nlat: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Also write the report to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run independent flows over a list of initial areas or radii.
    Sweep(SweepCli),
    /// Write a closed-form profile as CSV.
    Exact {
        #[command(subcommand)]
        profile: ExactCli,
        /// Output file; stdout if absent.
        #[arg(long, global = true)]
        output: Option<PathBuf>,
    },
    /// List the horizons of a static profile or export the chart across one.
    Kruskal(KruskalCli),
}

#[derive(Args)]
struct SweepCli {
    /// JSON configuration template; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Initial areas, e.g. `2pi,4pi,8pi`.
    #[arg(long, value_delimiter = ',', value_parser = parse_real_arg, conflicts_with = "b0", required_unless_present = "b0")]
    areas: Option<Vec<f64>>,
    /// Initial radii b₀; each stands for the area 4πb₀².
    #[arg(long, value_delimiter = ',', value_parser = parse_real_arg)]
    b0: Option<Vec<f64>>,
    /// Table path; defaults to `<output_dir>/sweep.csv`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write each cell's time series and summary to `<output_dir>/cell-NNN`.
    #[arg(long)]
    per_cell: bool,
    /// Worker threads; all cores if absent.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum ExactCli {
    /// Round solution b(t) = √(1 + e^{2t}(b₀² − 1)).
    Sphere {
        #[arg(long)]
        b0: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Closed-form area of the maximally symmetric cones.
    Area {
        #[arg(long, default_value = "de-sitter")]
        model: ModelSpec,
        #[arg(long, value_parser = parse_real_arg)]
        area0: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Ancient solution along the meridian φ = 0.
    Ancient {
        #[arg(long, value_enum)]
        solution: AncientArg,
        #[arg(long)]
        t_hat_offset: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        /// Boost as `DX,DY,DZ,RAPIDITY`.
        #[arg(long, value_delimiter = ',', value_parser = parse_real_arg, allow_hyphen_values = true)]
        boost: Option<Vec<f64>>,
        #[arg(long, default_value_t = 181)]
        samples: usize,
    },
    /// STCMC factor along the meridian φ = 0.
    Stcmc {
        #[arg(long)]
        b: f64,
        /// Vector `AX,AY,AZ`.
        #[arg(long, value_delimiter = ',', value_parser = parse_real_arg, allow_hyphen_values = true)]
        a: Option<Vec<f64>>,
        #[arg(long, default_value_t = 181)]
        samples: usize,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum AncientArg {
    ShrinkingSphere,
    KingRosenau,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ProfileArg {
    DeSitter,
    ReissnerNordstrom,
    Laurent,
}

#[derive(Args)]
struct KruskalCli {
    #[arg(long, value_enum, default_value = "de-sitter")]
    profile: ProfileArg,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 0.0)]
    charge: f64,
    /// Laurent terms `POWER:COEFF,...`, e.g. `0:1,2:-1`.
    #[arg(long, value_delimiter = ',', value_parser = parse_term, allow_hyphen_values = true)]
    terms: Option<Vec<(i32, f64)>>,
    /// Radial interval `LO,HI`; de Sitter defaults to `0,5`.
    #[arg(long, value_delimiter = ',', value_parser = parse_real_arg)]
    bracket: Option<Vec<f64>>,
    /// Index of the horizon, in increasing radius.
    #[arg(long, default_value_t = 0)]
    horizon: usize,
    /// Quadrature nodes on each side of the horizon.
    #[arg(long, default_value_t = 400)]
    nodes: usize,
    #[arg(long, default_value_t = 1.0)]
    lightcone_constant: f64,
    /// Rows of the exported CSV.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Only list the horizons.
    #[arg(long)]
    list: bool,
    /// CSV path; stdout if absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_real_arg(s: &str) -> Result<f64, String> {
    config::parse_real(s).map_err(|e| e.to_string())
}

fn verify(suite: &str, nlat: usize, seed: u64, output: Option<&PathBuf>) -> anyhow::Result<ExitCode> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse::<Suite>().map_err(|_| {
            usage(format!("unknown suite {suite:?}; expected area-law, rescaling, ancient, kruskal, geometry or all"))
        })?]
    };
    if nlat < 8 {
        return Err(usage(format!("--nlat must be at least 8, got {nlat}")));
    }
    let opts = VerifyOptions { nlat, seed };
    let reports = suites.iter().map(|&s| run_suite(s, &opts)).collect::<Result<Vec<_>, _>>()?;
    let passed = reports.iter().all(|r| r.passed);
    let hash = config_hash(&serde_json::json!({ "suites": suites, "nlat": nlat, "seed": seed }))?;
    let doc = serde_json::json!({
        "tool": provenance::TOOL,
        "version": provenance::VERSION,
        "config_hash": hash,
        "nlat": nlat,
        "seed": seed,
        "passed": passed,
        "reports": reports,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    if let Some(path) = output {
        let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(f, "{text}")?;
        f.flush()?;
    }
    println!("{text}");
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn exact_request(p: ExactCli) -> anyhow::Result<ExactRequest> {
    Ok(match p {
        ExactCli::Sphere { b0, t_end, samples } => ExactRequest::Sphere { b0, t_end, samples },
        ExactCli::Area { model, area0, t_end, samples } => ExactRequest::Area { model, area0, t_end, samples },
        ExactCli::Ancient { solution, t_hat_offset, t, boost, samples } => {
            let boost = match boost.as_deref() {
                None => None,
                Some(&[x, y, z, r]) => Some([x, y, z, r]),
                Some(_) => return Err(usage("--boost takes DX,DY,DZ,RAPIDITY")),
            };
            let solution = match solution {
                AncientArg::ShrinkingSphere => AncientKind::ShrinkingSphere,
                AncientArg::KingRosenau => AncientKind::KingRosenau,
            };
            ExactRequest::Ancient { solution, t_hat_offset, t, boost, samples }
        }
        ExactCli::Stcmc { b, a, samples } => {
            let a = match a.as_deref() {
                None => [0.0; 3],
                Some(&[x, y, z]) => [x, y, z],
                Some(_) => return Err(usage("--a takes AX,AY,AZ")),
            };
            ExactRequest::Stcmc { b, a, samples }
        }
    })
}

fn chart_request(k: &KruskalCli) -> anyhow::Result<ChartRequest> {
    let profile = match k.profile {
        ProfileArg::DeSitter => ProfileSpec::DeSitter,
        ProfileArg::ReissnerNordstrom => ProfileSpec::ReissnerNordstrom { mass: k.mass, charge: k.charge },
        ProfileArg::Laurent => {
            ProfileSpec::Laurent { terms: k.terms.clone().ok_or_else(|| usage("--profile laurent needs --terms"))? }
        }
    };
    let bracket = match (k.bracket.as_deref(), k.profile) {
        (Some(&[lo, hi]), _) => (lo, hi),
        (Some(_), _) => return Err(usage("--bracket takes LO,HI")),
        (None, ProfileArg::DeSitter) => (0.0, 5.0),
        (None, _) => return Err(usage("--bracket is required for this profile")),
    };
    Ok(ChartRequest {
        profile,
        bracket,
        horizon: k.horizon,
        nodes_per_side: k.nodes,
        lightcone_constant: k.lightcone_constant,
        samples: k.samples,
    })
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Simulate { config, overrides } => {
            let cfg = RunConfig::resolve(config.as_deref(), &overrides)?;
            simulate::cmd_simulate(&cfg)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, nlat, seed, output } => verify(&suite, nlat, seed, output.as_ref()),
        Command::Sweep(s) => {
            let template = RunConfig::resolve(s.config.as_deref(), &s.overrides)?;
            let (parameter, values) = match (s.areas, s.b0) {
                (Some(v), None) => (Parameter::Area, v),
                (None, Some(v)) => (Parameter::B0, v),
                _ => return Err(usage("exactly one of --areas and --b0 is required")),
            };
            let args = SweepArgs { template, parameter, values, output: s.output, per_cell: s.per_cell, threads: s.threads };
            let failed = sweep::cmd_sweep(&args)?;
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Exact { profile, output } => {
            let req = exact_request(profile)?;
            match output {
                Some(path) => {
                    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    let mut out = BufWriter::new(file);
                    exact::cmd_exact(&req, &mut out)?;
                    out.flush()?;
                }
                None => exact::cmd_exact(&req, std::io::stdout().lock())?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Kruskal(k) => {
            let req = chart_request(&k)?;
            if k.list {
                kruskal_cmd::cmd_list(&req)?;
            } else {
                kruskal_cmd::cmd_chart(&req, k.output.as_ref())?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn error_json(kind: &str, err: &anyhow::Error) -> String {
    let chain: Vec<String> = err.chain().map(|c| c.to_string()).collect();
    let doc = serde_json::json!({
        "error": { "kind": kind, "message": format!("{err:#}"), "chain": chain },
        "tool": provenance::TOOL,
        "version": provenance::VERSION,
    });
    serde_json::to_string(&doc).expect("a JSON value always serializes")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("{}", error_json("usage", &anyhow::anyhow!(e.kind().to_string())));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            let (kind, code) = if e.chain().any(|c| c.is::<UsageError>()) { ("usage", 2) } else { ("failure", 1) };
            eprintln!("{}", error_json(kind, &e));
            ExitCode::from(code)
        }
    }
}
