//! CSV time series and JSON run summaries.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{area_closed_form, area_law_check, predict_tmax, t_tilde_closed_form, FlowSeries, FlowState, Outcome};
use crate::conformal_geometry::LightconeModel;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 11] =
    ["t", "area", "area_closed_form", "R_min", "R_max", "H2_min", "H2_max", "roundness", "t_tilde", "t_hat", "dt"];

/// One row of the time series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub t: f64,
    pub area: f64,
    pub area_closed_form: Option<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub h2_min: f64,
    pub h2_max: f64,
    pub roundness: f64,
    pub t_tilde: f64,
    pub t_hat: f64,
    pub dt: f64,
}

impl FlowRecord {
    pub fn new(state: &FlowState, model: &LightconeModel) -> Self {
        Self {
            t: state.t,
            area: state.area,
            area_closed_form: area_closed_form(state.area0, state.t, model),
            r_min: state.r_min,
            r_max: state.r_max,
            h2_min: state.h2_min,
            h2_max: state.h2_max,
            roundness: state.roundness,
            t_tilde: state.t_tilde,
            t_hat: state.t_hat,
            dt: state.dt,
        }
    }
}

/// Writes the header and one row per recorded state.
pub fn write_csv<W: Write>(series: &FlowSeries, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    writeln!(out, "{}", CSV_COLUMNS.join(",")).map_err(io)?;
    for s in &series.states {
        let r = FlowRecord::new(s, &series.model);
        let closed = r.area_closed_form.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.t, r.area, closed, r.r_min, r.r_max, r.h2_min, r.h2_max, r.roundness, r.t_tilde, r.t_hat, r.dt
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Run summary with the closed-form comparisons and certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub model: String,
    pub outcome: Outcome,
    pub steps: usize,
    pub area0: f64,
    pub t_final: f64,
    pub area_final: f64,
    pub predicted_tmax: Option<f64>,
    pub area_law_max_rel_error: Option<f64>,
    pub t_tilde_numeric: f64,
    pub t_tilde_closed_form: Option<f64>,
    pub final_state: FlowRecord,
    pub max_abs_h2_final: f64,
}

impl FlowSummary {
    pub fn new(series: &FlowSeries) -> Self {
        let last = series.last();
        let de_sitter = matches!(series.model, LightconeModel::DeSitter);
        Self {
            model: series.model.name().into(),
            outcome: series.outcome,
            steps: series.steps,
            area0: series.area0,
            t_final: last.t,
            area_final: last.area,
            predicted_tmax: predict_tmax(series.area0, &series.model),
            area_law_max_rel_error: area_law_check(series).ok(),
            t_tilde_numeric: last.t_tilde,
            t_tilde_closed_form: de_sitter.then(|| t_tilde_closed_form(series.area0, last.t)),
            final_state: FlowRecord::new(last, &series.model),
            max_abs_h2_final: last.h2_max_abs(),
        }
    }
}
