//! Closed-form area laws, extinction times and rescaled clocks.

use std::f64::consts::PI;

use super::FlowSeries;
use crate::conformal_geometry::LightconeModel;
use crate::error::{Error, Result};

const FOUR_PI: f64 = 4.0 * PI;

/// Extinction time predicted by the area law, if the area reaches zero.
pub fn predict_tmax(area0: f64, model: &LightconeModel) -> Option<f64> {
    if !(area0 > 0.0) {
        return None;
    }
    match model {
        LightconeModel::DeSitter => (area0 < FOUR_PI).then(|| -0.5 * (-area0 / FOUR_PI).ln_1p()),
        LightconeModel::AntiDeSitter => Some(0.5 * (area0 / FOUR_PI).ln_1p()),
        LightconeModel::Minkowski => Some(area0 / (8.0 * PI)),
        LightconeModel::ClassS { .. } => None,
    }
}

/// `|Σ_t|` from the area law of the model; `None` without a closed form.
pub fn area_closed_form(area0: f64, t: f64, model: &LightconeModel) -> Option<f64> {
    match model {
        LightconeModel::DeSitter => Some(FOUR_PI + (2.0 * t).exp() * (area0 - FOUR_PI)),
        LightconeModel::AntiDeSitter => Some((FOUR_PI + area0) * (-2.0 * t).exp() - FOUR_PI),
        LightconeModel::Minkowski => Some(area0 - 8.0 * PI * t),
        LightconeModel::ClassS { .. } => None,
    }
}

/// Closed-form rescaled time
/// `t̃(t) = (A₀/4π)(t + ½ ln(A₀/(4π + e^{2t}(A₀ − 4π))))` of the de Sitter flow.
pub fn t_tilde_closed_form(area0: f64, t: f64) -> f64 {
    let a = area0 / FOUR_PI;
    // A₀/(4π + e^{2t}(A₀−4π)) = a/(1 + e^{2t}(a−1))
    let denom = 1.0 + (2.0 * t).exp() * (a - 1.0);
    a * (t + 0.5 * (a / denom).ln())
}

/// `lim_{t→∞} t̃(t) = (A₀/8π) ln(A₀/(A₀ − 4π))`, finite for `A₀ > 4π`.
pub fn t_tilde_limit(area0: f64) -> Option<f64> {
    (area0 > FOUR_PI).then(|| area0 / (8.0 * PI) * (area0 / (area0 - FOUR_PI)).ln())
}

/// Max relative deviation of the recorded areas from the area law, over the
/// states with `t ≤ 0.9·T_max` (all states when the flow is eternal).
pub fn area_law_check(series: &FlowSeries) -> Result<f64> {
    if series.states.len() < 2 {
        return Err(Error::InvalidParameter("area law check needs at least two states".into()));
    }
    let model = &series.model;
    let horizon = predict_tmax(series.area0, model).map_or(f64::INFINITY, |t| 0.9 * t);
    let mut worst: f64 = 0.0;
    for s in series.states.iter().filter(|s| s.t <= horizon) {
        let exact = area_closed_form(series.area0, s.t, model).ok_or_else(|| Error::NoClosedForm(model.name().into()))?;
        worst = worst.max((s.area - exact).abs() / exact.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extinction_times() {
        let ds = LightconeModel::DeSitter;
        assert!((predict_tmax(2.0 * PI, &ds).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(predict_tmax(FOUR_PI, &ds), None);
        assert_eq!(predict_tmax(8.0 * PI, &ds), None);
        let ads = LightconeModel::AntiDeSitter;
        assert!((predict_tmax(FOUR_PI, &ads).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!((predict_tmax(FOUR_PI, &LightconeModel::Minkowski).unwrap() - 0.5).abs() < 1e-15);
        // the predicted time is the root of the area law
        for (model, a0) in [(ds, 3.0), (ads, 20.0), (LightconeModel::Minkowski, 7.0)] {
            let t = predict_tmax(a0, &model).unwrap();
            assert!(area_closed_form(a0, t, &model).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn area_laws() {
        let e2 = std::f64::consts::E.powi(2);
        let ds = LightconeModel::DeSitter;
        assert_eq!(area_closed_form(FOUR_PI, 3.0, &ds).unwrap(), FOUR_PI);
        assert!((area_closed_form(8.0 * PI, 1.0, &ds).unwrap() - (FOUR_PI + FOUR_PI * e2)).abs() < 1e-12);
        assert!((area_closed_form(FOUR_PI, 0.25, &LightconeModel::Minkowski).unwrap() - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn rescaled_time() {
        for t in [0.0, 0.3, 2.0] {
            assert!((t_tilde_closed_form(FOUR_PI, t) - t).abs() < 1e-15);
        }
        assert!((t_tilde_limit(8.0 * PI).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((t_tilde_closed_form(8.0 * PI, 30.0) - 2f64.ln()).abs() < 1e-12);
        // t̃ → ∞ as t → T_max for A₀ = 2π
        let tmax = predict_tmax(2.0 * PI, &LightconeModel::DeSitter).unwrap();
        let near: Vec<f64> = [1e-2, 1e-4, 1e-8].iter().map(|d| t_tilde_closed_form(2.0 * PI, tmax - d)).collect();
        assert!(near.windows(2).all(|w| w[1] > w[0] + 1.0));
    }

    #[test]
    fn rescaled_time_derivative_is_area_ratio() {
        let (a0, t, h) = (5.0 * PI, 0.4, 1e-5);
        let fd = (t_tilde_closed_form(a0, t + h) - t_tilde_closed_form(a0, t - h)) / (2.0 * h);
        let c = a0 / area_closed_form(a0, t, &LightconeModel::DeSitter).unwrap();
        assert!((fd - c).abs() < 1e-9);
    }
}
