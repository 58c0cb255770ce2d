//! `exact`: closed-form profiles as CSV.

use std::io::Write;

use nullflow::exact_solutions::{sphere_solution, AncientKind};
use nullflow::flow_engine::{area_closed_form, predict_tmax, t_tilde_closed_form};
use nullflow::{AncientSolution, LightconeModel, LorentzBoost, StcmcParams};
use serde::Serialize;

use crate::config::ModelSpec;
use crate::provenance::{config_hash, csv_preamble};
use crate::usage;

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum ExactRequest {
    /// `t, b(t), area(t)` of the round solution.
    Sphere { b0: f64, t_end: f64, samples: usize },
    /// `t, area(t)` and, for de Sitter, `t̃(t)`.
    Area { model: ModelSpec, area0: f64, t_end: f64, samples: usize },
    /// `θ, ω, ln ω` along the meridian `φ = 0` at physical time `t`.
    Ancient { solution: AncientKind, t_hat_offset: f64, t: f64, boost: Option<[f64; 4]>, samples: usize },
    /// `θ, ω` along the meridian `φ = 0`.
    Stcmc { b: f64, a: [f64; 3], samples: usize },
}

fn grid_1d(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 })
}

fn meridian(theta: f64) -> [f64; 3] {
    [theta.sin(), 0.0, theta.cos()]
}

fn check_samples(n: usize) -> anyhow::Result<()> {
    if n == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    Ok(())
}

fn check_t_end(t: f64) -> anyhow::Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(usage(format!("--t-end must be finite and ≥ 0, got {t}")));
    }
    Ok(())
}

/// Writes the profile with a provenance line; rows past an extinction time
/// are omitted.
pub fn cmd_exact<W: Write>(req: &ExactRequest, out: W) -> anyhow::Result<()> {
    let hash = config_hash(req)?;
    let mut out = out;
    writeln!(out, "{}", csv_preamble(&hash))?;
    let mut w = csv::Writer::from_writer(out);
    let bad = |e: nullflow::Error| usage(e.to_string());
    match req {
        ExactRequest::Sphere { b0, t_end, samples } => {
            check_samples(*samples)?;
            check_t_end(*t_end)?;
            sphere_solution(*b0, 0.0).map_err(bad)?;
            w.write_record(["t", "b", "area"])?;
            for t in grid_1d(0.0, *t_end, *samples) {
                if let Ok(b) = sphere_solution(*b0, t) {
                    let area = 4.0 * std::f64::consts::PI * b * b;
                    w.write_record([t.to_string(), b.to_string(), area.to_string()])?;
                }
            }
        }
        ExactRequest::Area { model, area0, t_end, samples } => {
            check_samples(*samples)?;
            check_t_end(*t_end)?;
            if !(*area0 > 0.0) {
                return Err(usage(format!("--area0 must be positive, got {area0}")));
            }
            let m = model.build()?;
            if matches!(m, LightconeModel::ClassS { .. }) {
                return Err(bad(nullflow::Error::NoClosedForm(m.name().into())));
            }
            let de_sitter = matches!(m, LightconeModel::DeSitter);
            let t_max = predict_tmax(*area0, &m).unwrap_or(f64::INFINITY);
            w.write_record(["t", "area", "t_tilde"])?;
            for t in grid_1d(0.0, *t_end, *samples).filter(|&t| t < t_max) {
                let Some(a) = area_closed_form(*area0, t, &m).filter(|a| *a > 0.0) else { continue };
                let tt = if de_sitter { t_tilde_closed_form(*area0, t).to_string() } else { String::new() };
                w.write_record([t.to_string(), a.to_string(), tt])?;
            }
        }
        ExactRequest::Ancient { solution, t_hat_offset, t, boost, samples } => {
            check_samples(*samples)?;
            let boost = boost.map(|[x, y, z, r]| LorentzBoost::new([x, y, z], r)).transpose().map_err(bad)?;
            let sol = AncientSolution::new(*solution, *t_hat_offset, boost).map_err(bad)?;
            sol.area(*t).map_err(bad)?;
            w.write_record(["theta", "omega", "log_omega"])?;
            for th in grid_1d(0.0, std::f64::consts::PI, *samples) {
                let u = sol.log_omega_at(*t, meridian(th));
                w.write_record([th.to_string(), u.exp().to_string(), u.to_string()])?;
            }
        }
        ExactRequest::Stcmc { b, a, samples } => {
            check_samples(*samples)?;
            let p = StcmcParams::new(*b, *a).map_err(bad)?;
            w.write_record(["theta", "omega"])?;
            for th in grid_1d(0.0, std::f64::consts::PI, *samples) {
                w.write_record([th.to_string(), p.omega_at(meridian(th)).to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(req: &ExactRequest) -> Vec<Vec<f64>> {
        let mut buf = Vec::new();
        cmd_exact(req, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        text.lines()
            .skip(2)
            .map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    #[test]
    fn sphere_stops_before_extinction() {
        let b0: f64 = 0.5;
        let ext = -0.5 * (1.0 - b0 * b0).ln();
        let r = rows(&ExactRequest::Sphere { b0, t_end: 1.0, samples: 101 });
        assert!(r.iter().all(|row| row[0] < ext));
        assert!((r[0][1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn stcmc_round_case_is_constant() {
        let r = rows(&ExactRequest::Stcmc { b: 2.0, a: [0.0; 3], samples: 7 });
        assert_eq!(r.len(), 7);
        assert!(r.iter().all(|row| (row[1] - 2.0).abs() < 1e-15));
    }

    #[test]
    fn de_sitter_area_column_matches_law() {
        let a0 = 2.0 * std::f64::consts::PI;
        let r = rows(&ExactRequest::Area { model: ModelSpec::DeSitter, area0: a0, t_end: 0.3, samples: 4 });
        for row in r {
            let want = 4.0 * std::f64::consts::PI + (a0 - 4.0 * std::f64::consts::PI) * (2.0 * row[0]).exp();
            assert!((row[1] - want).abs() < 1e-12 * want);
        }
    }
}
