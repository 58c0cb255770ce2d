//! Run configuration: the JSON schema read by `simulate` and `sweep`, flag
//! overrides, and construction of the model, grid and initial data.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anyhow::Context;
use nullflow::exact_solutions::{nmcf_from_ancient, stcmc_factor};
use nullflow::sphere_field::{read_snapshot, synthesize_random};
use nullflow::{
    AncientKind, AncientSolution, ConformalFactor, FlowConfig, HProfile, LaurentProfile, LightconeModel, LorentzBoost,
    Scheme, SnapshotFormat, SphericalGrid, StcmcParams,
};
use serde::{Deserialize, Serialize};

use crate::usage;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Minkowski,
    #[default]
    DeSitter,
    AntiDeSitter,
    /// `h(r) = Σ c r^p` restricted to the open interval `bracket`.
    Laurent { terms: Vec<(i32, f64)>, bracket: (f64, f64) },
    /// `h(r) = 1 − 2M/r + Q²/r²` restricted to `bracket`.
    ReissnerNordstrom { mass: f64, charge: f64, bracket: (f64, f64) },
}

impl ModelSpec {
    pub fn build(&self) -> anyhow::Result<LightconeModel> {
        let class_s = |p: LaurentProfile, (lo, hi): (f64, f64)| {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(usage(format!("bracket must be a finite interval lo < hi, got ({lo}, {hi})")));
            }
            Ok(LightconeModel::ClassS { h: HProfile::Laurent(p), bracket: (lo, hi) })
        };
        match self {
            ModelSpec::Minkowski => Ok(LightconeModel::Minkowski),
            ModelSpec::DeSitter => Ok(LightconeModel::DeSitter),
            ModelSpec::AntiDeSitter => Ok(LightconeModel::AntiDeSitter),
            ModelSpec::Laurent { terms, bracket } => class_s(LaurentProfile::new(terms.clone()), *bracket),
            ModelSpec::ReissnerNordstrom { mass, charge, bracket } => {
                class_s(LaurentProfile::reissner_nordstrom(*mass, *charge), *bracket)
            }
        }
    }
}

impl FromStr for ModelSpec {
    type Err = anyhow::Error;

    /// Accepts the three maximally symmetric models by name.
    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "minkowski" => Ok(ModelSpec::Minkowski),
            "de-sitter" => Ok(ModelSpec::DeSitter),
            "anti-de-sitter" => Ok(ModelSpec::AntiDeSitter),
            _ => Err(usage(format!(
                "unknown model {s:?}; expected minkowski, de-sitter or anti-de-sitter (class-S models go in the config file)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nlat: usize,
    pub nlon: usize,
    /// Defaults to `nlat − 1`.
    #[serde(default)]
    pub lmax: Option<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nlat: 64, nlon: 128, lmax: None }
    }
}

impl GridSpec {
    pub fn build(&self) -> anyhow::Result<Arc<SphericalGrid>> {
        let lmax = self.lmax.unwrap_or(self.nlat.saturating_sub(1));
        SphericalGrid::with_lmax(self.nlat, self.nlon, lmax).map_err(|e| usage(e.to_string()))
    }
}

fn default_lmax_pert() -> usize {
    4
}

fn default_amplitude() -> f64 {
    0.1
}

/// Exactly one initial-data descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// The round sphere of radius `b`.
    Constant { b: f64 },
    /// `ω(x) = b/(√(1+|a|²) − a·x)`.
    Stcmc {
        b: f64,
        #[serde(default)]
        a: [f64; 3],
    },
    /// `ω = exp(φ)` with `φ` a random band-limited field of zero mean.
    Random {
        seed: u64,
        #[serde(default = "default_lmax_pert")]
        lmax_pert: usize,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// An ancient solution evaluated at `t = 0`.
    Ancient {
        solution: AncientKind,
        t_hat_offset: f64,
        #[serde(default)]
        boost: Option<BoostSpec>,
    },
    /// Node values of `ω` in the snapshot format; the snapshot fixes the grid.
    Snapshot {
        path: PathBuf,
        #[serde(default)]
        format: SnapshotFormat,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoostSpec {
    pub direction: [f64; 3],
    pub rapidity: f64,
}

fn parse_list(s: &str) -> anyhow::Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_real).collect()
}

impl FromStr for InitialData {
    type Err = anyhow::Error;

    /// `constant:B`, `stcmc:B[,AX,AY,AZ]`, `random:SEED[,LMAX_PERT[,AMPLITUDE]]`,
    /// `ancient:shrinking-sphere|king-rosenau,T0[,DX,DY,DZ,RAPIDITY]`,
    /// `snapshot:PATH[,text|binary]`.
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let bad = |what: &str| usage(format!("bad initial-data descriptor {s:?}: expected {what}"));
        match kind {
            "constant" => match parse_list(rest)?[..] {
                [b] => Ok(InitialData::Constant { b }),
                _ => Err(bad("constant:B")),
            },
            "stcmc" => match parse_list(rest)?[..] {
                [b] => Ok(InitialData::Stcmc { b, a: [0.0; 3] }),
                [b, x, y, z] => Ok(InitialData::Stcmc { b, a: [x, y, z] }),
                _ => Err(bad("stcmc:B[,AX,AY,AZ]")),
            },
            "random" => {
                let parts: Vec<&str> = rest.split(',').collect();
                let seed = parts[0].trim().parse::<u64>().map_err(|_| bad("random:SEED[,LMAX_PERT[,AMPLITUDE]]"))?;
                let lmax_pert = match parts.get(1) {
                    Some(p) => p.trim().parse::<usize>().map_err(|_| bad("an integer LMAX_PERT"))?,
                    None => default_lmax_pert(),
                };
                let amplitude = match parts.get(2) {
                    Some(p) => parse_real(p)?,
                    None => default_amplitude(),
                };
                if parts.len() > 3 {
                    return Err(bad("random:SEED[,LMAX_PERT[,AMPLITUDE]]"));
                }
                Ok(InitialData::Random { seed, lmax_pert, amplitude })
            }
            "ancient" => {
                let (name, nums) = rest.split_once(',').ok_or_else(|| bad("ancient:KIND,T0[,DX,DY,DZ,RAPIDITY]"))?;
                let solution = match name.trim() {
                    "shrinking-sphere" => AncientKind::ShrinkingSphere,
                    "king-rosenau" => AncientKind::KingRosenau,
                    _ => return Err(bad("KIND = shrinking-sphere or king-rosenau")),
                };
                match parse_list(nums)?[..] {
                    [t_hat_offset] => Ok(InitialData::Ancient { solution, t_hat_offset, boost: None }),
                    [t_hat_offset, x, y, z, rapidity] => Ok(InitialData::Ancient {
                        solution,
                        t_hat_offset,
                        boost: Some(BoostSpec { direction: [x, y, z], rapidity }),
                    }),
                    _ => Err(bad("ancient:KIND,T0[,DX,DY,DZ,RAPIDITY]")),
                }
            }
            "snapshot" => {
                let (path, format) = match rest.rsplit_once(',') {
                    Some((p, "text")) => (p, SnapshotFormat::Text),
                    Some((p, "binary")) => (p, SnapshotFormat::Binary),
                    _ => (rest, SnapshotFormat::Text),
                };
                if path.is_empty() {
                    return Err(bad("snapshot:PATH[,text|binary]"));
                }
                Ok(InitialData::Snapshot { path: path.into(), format })
            }
            _ => Err(bad("one of constant, stcmc, random, ancient, snapshot")),
        }
    }
}

/// Integrator settings; defaults match the library defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSpec {
    pub scheme: Scheme,
    pub dt_init: f64,
    pub cfl_safety: f64,
    pub t_end: f64,
    pub stop_area_floor: f64,
    pub roundness_tol: f64,
    pub h2_tol: f64,
    pub record_every: usize,
    pub dealias: bool,
    pub stop_on_certificate: bool,
    pub max_steps: usize,
}

impl Default for FlowSpec {
    fn default() -> Self {
        let c = FlowConfig::new(LightconeModel::DeSitter);
        Self {
            scheme: c.scheme,
            dt_init: c.dt_init,
            cfl_safety: c.cfl_safety,
            t_end: c.t_end,
            stop_area_floor: c.stop_area_floor,
            roundness_tol: c.roundness_tol,
            h2_tol: c.h2_tol,
            record_every: c.record_every,
            dealias: c.dealias,
            stop_on_certificate: c.stop_on_certificate,
            max_steps: c.max_steps,
        }
    }
}

impl FlowSpec {
    pub fn build(&self, model: LightconeModel) -> anyhow::Result<FlowConfig> {
        let c = FlowConfig {
            model,
            scheme: self.scheme,
            dt_init: self.dt_init,
            cfl_safety: self.cfl_safety,
            t_end: self.t_end,
            stop_area_floor: self.stop_area_floor,
            roundness_tol: self.roundness_tol,
            h2_tol: self.h2_tol,
            record_every: self.record_every,
            dealias: self.dealias,
            stop_on_certificate: self.stop_on_certificate,
            max_steps: self.max_steps,
        };
        c.validate().map_err(|e| usage(e.to_string()))?;
        Ok(c)
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub grid: GridSpec,
    pub initial: InitialData,
    /// Rescales the initial data to this area.
    #[serde(default)]
    pub area: Option<f64>,
    #[serde(default)]
    pub flow: FlowSpec,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

/// Fields of [`RunConfig`] that determine the computed numbers; the hash
/// ignores where the artifacts are written.
#[derive(Serialize)]
struct HashedConfig<'a> {
    model: &'a ModelSpec,
    grid: &'a GridSpec,
    initial: &'a InitialData,
    area: &'a Option<f64>,
    flow: &'a FlowSpec,
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Lightcone model: minkowski, de-sitter or anti-de-sitter.
    #[arg(long)]
    pub model: Option<ModelSpec>,
    /// Initial data, e.g. `constant:0.5`, `stcmc:1,0,0,0.3`, `random:7`,
    /// `ancient:king-rosenau,2`, `snapshot:omega.txt`.
    #[arg(long)]
    pub initial: Option<InitialData>,
    /// Seed of random initial data.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial area; accepts multiples of pi such as `2pi`.
    #[arg(long, value_parser = parse_real_arg)]
    pub area: Option<f64>,
    #[arg(long)]
    pub nlat: Option<usize>,
    #[arg(long)]
    pub nlon: Option<usize>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Initial and largest time step.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Keep integrating after an outcome is certified.
    #[arg(long)]
    pub no_stop_on_certificate: bool,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum SchemeArg {
    Rk4,
    Imex,
}

impl RunConfig {
    /// Reads `path`; relative snapshot paths are taken relative to the file.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let file = File::open(path).map_err(|e| usage(format!("cannot open config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
        if let InitialData::Snapshot { path: snap, .. } = &mut cfg.initial {
            if snap.is_relative() {
                if let Some(dir) = path.parent() {
                    *snap = dir.join(&*snap);
                }
            }
        }
        Ok(cfg)
    }

    /// Starts from `path` (if any) and applies `o`; without a file the
    /// initial data must come from the flags.
    pub fn resolve(path: Option<&Path>, o: &Overrides) -> anyhow::Result<Self> {
        let mut cfg = match (path, &o.initial) {
            (Some(p), _) => Self::load(p)?,
            (None, Some(init)) => RunConfig {
                model: ModelSpec::default(),
                grid: GridSpec::default(),
                initial: init.clone(),
                area: None,
                flow: FlowSpec::default(),
                output_dir: default_output_dir(),
            },
            (None, None) => return Err(usage("either --config or --initial is required")),
        };
        if let Some(m) = &o.model {
            cfg.model = m.clone();
        }
        if let Some(init) = &o.initial {
            cfg.initial = init.clone();
        }
        if let Some(seed) = o.seed {
            match &mut cfg.initial {
                InitialData::Random { seed: s, .. } => *s = seed,
                _ => return Err(usage("--seed applies only to random initial data")),
            }
        }
        if o.area.is_some() {
            cfg.area = o.area;
        }
        if let Some(n) = o.nlat {
            cfg.grid.nlat = n;
            if o.nlon.is_none() {
                cfg.grid.nlon = 2 * n;
            }
            cfg.grid.lmax = None;
        }
        if let Some(n) = o.nlon {
            cfg.grid.nlon = n;
        }
        if let Some(s) = o.scheme {
            cfg.flow.scheme = match s {
                SchemeArg::Rk4 => Scheme::Rk4,
                SchemeArg::Imex => Scheme::Imex,
            };
        }
        if let Some(dt) = o.dt {
            cfg.flow.dt_init = dt;
        }
        if let Some(t) = o.t_end {
            cfg.flow.t_end = t;
        }
        if let Some(n) = o.record_every {
            cfg.flow.record_every = n;
        }
        if o.no_stop_on_certificate {
            cfg.flow.stop_on_certificate = false;
        }
        if let Some(d) = &o.output_dir {
            cfg.output_dir = d.clone();
        }
        Ok(cfg)
    }

    pub fn hash(&self) -> anyhow::Result<String> {
        crate::provenance::config_hash(&HashedConfig {
            model: &self.model,
            grid: &self.grid,
            initial: &self.initial,
            area: &self.area,
            flow: &self.flow,
        })
    }

    /// Checks everything that can be checked without integrating and returns
    /// the flow configuration and initial factor.
    pub fn prepare(&self) -> anyhow::Result<(FlowConfig, ConformalFactor)> {
        let model = self.model.build()?;
        let config = self.flow.build(model)?;
        let omega0 = self.initial_factor()?;
        let omega0 = match self.area {
            Some(a) => omega0.with_area(a).map_err(|e| usage(e.to_string()))?,
            None => omega0,
        };
        Ok((config, omega0))
    }

    pub fn initial_factor(&self) -> anyhow::Result<ConformalFactor> {
        let bad = |e: nullflow::Error| usage(format!("invalid initial data: {e}"));
        match &self.initial {
            InitialData::Snapshot { path, format } => {
                let file = File::open(path).map_err(|e| usage(format!("cannot open snapshot {}: {e}", path.display())))?;
                let field = read_snapshot(BufReader::new(file), *format)
                    .with_context(|| format!("reading snapshot {}", path.display()))
                    .map_err(|e| usage(format!("{e:#}")))?;
                ConformalFactor::from_omega(&field).map_err(bad)
            }
            other => {
                let grid = self.grid.build()?;
                match other {
                    InitialData::Constant { b } => ConformalFactor::constant(&grid, *b).map_err(bad),
                    InitialData::Stcmc { b, a } => {
                        let p = StcmcParams::new(*b, *a).map_err(bad)?;
                        stcmc_factor(&p, &grid).map_err(bad)
                    }
                    InitialData::Random { seed, lmax_pert, amplitude } => {
                        let phi = synthesize_random(&grid, *seed, *lmax_pert, *amplitude).map_err(bad)?;
                        Ok(ConformalFactor::from_log(phi))
                    }
                    InitialData::Ancient { solution, t_hat_offset, boost } => {
                        let boost = boost.map(|b| LorentzBoost::new(b.direction, b.rapidity)).transpose().map_err(bad)?;
                        let sol = AncientSolution::new(*solution, *t_hat_offset, boost).map_err(bad)?;
                        nmcf_from_ancient(&sol, 0.0, &grid).map_err(bad)
                    }
                    InitialData::Snapshot { .. } => unreachable!(),
                }
            }
        }
    }
}

/// A real number, optionally written as a multiple of π: `3`, `0.5`, `pi`,
/// `2pi`, `2*pi`, `-pi`.
pub fn parse_real(s: &str) -> anyhow::Result<f64> {
    let t = s.trim();
    let v = match t.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*').trim();
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| usage(format!("not a number: {s:?}")))?,
            };
            c * PI
        }
        None => t.parse::<f64>().map_err(|_| usage(format!("not a number: {s:?}")))?,
    };
    if !v.is_finite() {
        return Err(usage(format!("not a finite number: {s:?}")));
    }
    Ok(v)
}

fn parse_real_arg(s: &str) -> Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_with_pi() {
        assert_eq!(parse_real("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_real("8*pi").unwrap(), 8.0 * PI);
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real("-pi").unwrap(), -PI);
        assert_eq!(parse_real("0.25").unwrap(), 0.25);
        assert!(parse_real("abc").is_err());
        assert!(parse_real("inf").is_err());
    }

    #[test]
    fn descriptors() {
        assert_eq!("constant:0.5".parse::<InitialData>().unwrap(), InitialData::Constant { b: 0.5 });
        assert_eq!(
            "stcmc:1,0,0,0.3".parse::<InitialData>().unwrap(),
            InitialData::Stcmc { b: 1.0, a: [0.0, 0.0, 0.3] }
        );
        assert_eq!(
            "random:7".parse::<InitialData>().unwrap(),
            InitialData::Random { seed: 7, lmax_pert: 4, amplitude: 0.1 }
        );
        assert_eq!(
            "ancient:king-rosenau,2,0,0,1,0.5".parse::<InitialData>().unwrap(),
            InitialData::Ancient {
                solution: AncientKind::KingRosenau,
                t_hat_offset: 2.0,
                boost: Some(BoostSpec { direction: [0.0, 0.0, 1.0], rapidity: 0.5 })
            }
        );
        assert_eq!(
            "snapshot:a/b.bin,binary".parse::<InitialData>().unwrap(),
            InitialData::Snapshot { path: "a/b.bin".into(), format: SnapshotFormat::Binary }
        );
        for bad in ["constant", "stcmc:1,2", "random:x", "ancient:foo,1", "bogus:1"] {
            assert!(bad.parse::<InitialData>().is_err(), "{bad}");
        }
    }

    #[test]
    fn json_roundtrip_and_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"initial": {"kind": "random", "seed": 3}}"#).unwrap();
        assert_eq!(cfg.model, ModelSpec::DeSitter);
        assert_eq!(cfg.grid, GridSpec::default());
        assert_eq!(cfg.flow, FlowSpec::default());
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<RunConfig>(r#"{"initial": {"kind": "constant", "b": 1}, "typo": 1}"#).is_err());
    }

    #[test]
    fn overrides_take_precedence_and_hash_ignores_output_dir() {
        let o = Overrides {
            initial: Some("random:1".parse().unwrap()),
            seed: Some(9),
            nlat: Some(16),
            t_end: Some(0.5),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(None, &o).unwrap();
        assert_eq!(cfg.initial, InitialData::Random { seed: 9, lmax_pert: 4, amplitude: 0.1 });
        assert_eq!((cfg.grid.nlat, cfg.grid.nlon), (16, 32));
        assert_eq!(cfg.flow.t_end, 0.5);
        let mut moved = cfg.clone();
        moved.output_dir = "elsewhere".into();
        assert_eq!(cfg.hash().unwrap(), moved.hash().unwrap());
        let mut changed = cfg.clone();
        changed.flow.t_end = 0.6;
        assert_ne!(cfg.hash().unwrap(), changed.hash().unwrap());
    }

    #[test]
    fn class_s_models_need_a_finite_bracket() {
        let m = ModelSpec::ReissnerNordstrom { mass: 1.0, charge: 0.5, bracket: (2.0, f64::INFINITY) };
        assert!(m.build().is_err());
        let m = ModelSpec::Laurent { terms: vec![(0, 1.0), (2, -1.0)], bracket: (0.0, 0.9) };
        assert!(matches!(m.build().unwrap(), LightconeModel::ClassS { .. }));
    }
}
