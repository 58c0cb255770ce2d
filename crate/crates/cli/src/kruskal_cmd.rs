//! `kruskal`: horizons of a class-S profile and export of a chart.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::Context;
use nullflow::kruskal::{solve_f, Horizon};
use nullflow::{ChartOptions, ClassSModel, HProfile, LaurentProfile};
use serde::Serialize;

use crate::provenance::{config_hash, csv_preamble, Provenance};
use crate::usage;

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileSpec {
    DeSitter,
    ReissnerNordstrom { mass: f64, charge: f64 },
    Laurent { terms: Vec<(i32, f64)> },
}

#[derive(Clone, Debug, Serialize)]
pub struct ChartRequest {
    pub profile: ProfileSpec,
    pub bracket: (f64, f64),
    pub horizon: usize,
    pub nodes_per_side: usize,
    pub lightcone_constant: f64,
    pub samples: usize,
}

#[derive(Serialize)]
struct ChartSummary<'a> {
    #[serde(flatten)]
    provenance: Provenance,
    request: &'a ChartRequest,
    horizons: &'a [Horizon],
    domain: (f64, f64),
    range: (f64, f64),
    ode_residual: f64,
    output: Option<&'a PathBuf>,
}

/// `"2:-1"` → `(2, −1)`.
pub fn parse_term(t: &str) -> Result<(i32, f64), String> {
    let (p, c) = t.split_once(':').ok_or_else(|| format!("term {t:?} is not POWER:COEFF"))?;
    let p = p.trim().parse::<i32>().map_err(|e| format!("power in {t:?}: {e}"))?;
    let c = crate::config::parse_real(c).map_err(|e| e.to_string())?;
    Ok((p, c))
}

impl ChartRequest {
    fn model(&self) -> anyhow::Result<ClassSModel> {
        let (lo, hi) = self.bracket;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(usage(format!("bracket must be a finite interval lo < hi, got ({lo}, {hi})")));
        }
        let p = match &self.profile {
            ProfileSpec::DeSitter => LaurentProfile::new(vec![(0, 1.0), (2, -1.0)]),
            ProfileSpec::ReissnerNordstrom { mass, charge } => LaurentProfile::reissner_nordstrom(*mass, *charge),
            ProfileSpec::Laurent { terms } => LaurentProfile::new(terms.clone()),
        };
        Ok(ClassSModel::new(HProfile::Laurent(p), self.bracket).context("locating horizons")?)
    }
}

/// Prints the horizons of the profile as JSON.
pub fn cmd_list(req: &ChartRequest) -> anyhow::Result<()> {
    let model = req.model()?;
    let report = serde_json::json!({
        "tool": crate::provenance::TOOL,
        "version": crate::provenance::VERSION,
        "bracket": req.bracket,
        "horizons": model.horizons,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

/// Builds the chart across horizon `req.horizon` and writes its CSV to
/// `output` (stdout if absent). With a file, a JSON summary goes to stdout.
pub fn cmd_chart(req: &ChartRequest, output: Option<&PathBuf>) -> anyhow::Result<()> {
    if req.samples < 2 {
        return Err(usage("--samples must be at least 2"));
    }
    let model = req.model()?;
    if req.horizon >= model.horizons.len() {
        return Err(usage(format!(
            "horizon index {} out of range: the bracket contains {} horizon(s)",
            req.horizon,
            model.horizons.len()
        )));
    }
    let opts = ChartOptions {
        nodes_per_side: req.nodes_per_side,
        lightcone_constant: req.lightcone_constant,
        ..ChartOptions::default()
    };
    let chart = solve_f(&model, req.horizon, &opts).context("building the chart")?;
    let hash = config_hash(req)?;

    let write = |mut out: Box<dyn Write>| -> anyhow::Result<()> {
        writeln!(out, "{}", csv_preamble(&hash))?;
        chart.write_csv(&mut out, req.samples)?;
        out.flush()?;
        Ok(())
    };
    match output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write(Box::new(BufWriter::new(file)))?;
            let summary = ChartSummary {
                provenance: Provenance::new(hash.clone()),
                request: req,
                horizons: &model.horizons,
                domain: chart.domain(),
                range: chart.range(),
                ode_residual: chart.ode_residual()?,
                output: Some(path),
            };
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        None => write(Box::new(std::io::stdout().lock()))?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms() {
        assert_eq!(parse_term(" 2:-1").unwrap(), (2, -1.0));
        assert!(parse_term("0-1").is_err());
        assert!(parse_term("x:1").is_err());
    }
}
