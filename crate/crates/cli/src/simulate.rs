//! `simulate`: one flow run with a CSV time series and a JSON summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use nullflow::flow_engine::{run, write_csv, EXPANSION_AREA};
use nullflow::{FlowConfig, FlowSeries, FlowSummary, Outcome};
use serde::Serialize;

use crate::config::RunConfig;
use crate::provenance::{csv_preamble, Provenance};

/// Evidence for the classified outcome, next to the thresholds it was held to.
#[derive(Clone, Debug, Serialize)]
pub struct Certificates {
    pub roundness_final: f64,
    pub roundness_tol: f64,
    pub max_abs_h2_final: f64,
    pub h2_tol: f64,
    pub area_final: f64,
    pub expansion_area: f64,
    /// `|T_obs − T_pred|/T_pred` for a run that shrank to the tip.
    pub t_max_rel_error: Option<f64>,
}

impl Certificates {
    pub fn new(series: &FlowSeries, config: &FlowConfig) -> Self {
        let last = series.last();
        let t_max_rel_error = match series.outcome {
            Outcome::ShrinksToTip { t_max_observed, t_max_predicted } => {
                Some((t_max_observed - t_max_predicted).abs() / t_max_predicted)
            }
            _ => None,
        };
        Self {
            roundness_final: last.roundness,
            roundness_tol: config.roundness_tol,
            max_abs_h2_final: last.h2_max_abs(),
            h2_tol: config.h2_tol,
            area_final: last.area,
            expansion_area: EXPANSION_AREA,
            t_max_rel_error,
        }
    }
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    config: &'a RunConfig,
    summary: FlowSummary,
    certificates: Certificates,
}

/// Runs the flow described by `cfg`.
pub fn execute(cfg: &RunConfig) -> anyhow::Result<(FlowConfig, FlowSeries)> {
    let (config, omega0) = cfg.prepare()?;
    let series = run(&omega0, &config).context("flow integration failed")?;
    Ok((config, series))
}

/// Writes `timeseries.csv` and `summary.json` into `dir`.
pub fn write_artifacts(
    dir: &Path,
    cfg: &RunConfig,
    hash: &str,
    config: &FlowConfig,
    series: &FlowSeries,
) -> anyhow::Result<FlowSummary> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join("timeseries.csv");
    let mut out = BufWriter::new(File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?);
    writeln!(out, "{}", csv_preamble(hash))?;
    write_csv(series, &mut out)?;
    out.flush()?;

    let summary = FlowSummary::new(series);
    let file = SummaryFile {
        provenance: &Provenance::new(hash.to_owned()),
        config: cfg,
        summary: summary.clone(),
        certificates: Certificates::new(series, config),
    };
    let json_path = dir.join("summary.json");
    let mut out = BufWriter::new(File::create(&json_path).with_context(|| format!("creating {}", json_path.display()))?);
    serde_json::to_writer_pretty(&mut out, &file)?;
    writeln!(out)?;
    out.flush()?;
    Ok(summary)
}

/// `simulate`: prints the summary JSON on success.
pub fn cmd_simulate(cfg: &RunConfig) -> anyhow::Result<()> {
    let hash = cfg.hash()?;
    let (config, series) = execute(cfg)?;
    let summary = write_artifacts(&cfg.output_dir, cfg, &hash, &config, &series)?;
    let report = serde_json::json!({
        "tool": crate::provenance::TOOL,
        "version": crate::provenance::VERSION,
        "config_hash": hash,
        "output_dir": cfg.output_dir,
        "outcome": summary.outcome,
        "t_final": summary.t_final,
        "area_final": summary.area_final,
        "predicted_tmax": summary.predicted_tmax,
        "area_law_max_rel_error": summary.area_law_max_rel_error,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
