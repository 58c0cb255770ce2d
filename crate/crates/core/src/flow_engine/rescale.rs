//! Rescalings to volume-preserving Ricci flow and finite-difference residuals
//! of the evolution equations.

use std::f64::consts::PI;

use super::{advance, laws::t_tilde_closed_form, rhs, FlowConfig, FlowSeries, FlowState};
use crate::conformal_geometry::{scalar_curvature, spacetime_mean_curvature, ConformalFactor, LightconeModel};
use crate::error::{Error, Result};

/// A state of the area-normalized flow `γ̃ = c·γ`, `c = A₀/A`.
#[derive(Clone, Debug)]
pub struct RescaledState {
    pub t: f64,
    pub c: f64,
    pub t_tilde_closed: f64,
    pub t_tilde_numeric: f64,
    pub omega: ConformalFactor,
    pub area: f64,
}

/// Rescales every state of a de Sitter series to area `A₀`.
pub fn rescale_volume_preserving(series: &FlowSeries) -> Result<Vec<RescaledState>> {
    if !matches!(series.model, LightconeModel::DeSitter) {
        return Err(Error::RequiresDeSitter(series.model.name().into()));
    }
    Ok(series
        .states
        .iter()
        .map(|s| {
            let c = series.area0 / s.area;
            let omega = s.omega.scaled(c.sqrt());
            RescaledState {
                t: s.t,
                c,
                t_tilde_closed: t_tilde_closed_form(series.area0, s.t),
                t_tilde_numeric: s.t_tilde,
                area: crate::conformal_geometry::area(&omega),
                omega,
            }
        })
        .collect())
}

/// States at `t + kδ`, `k = 0..4`.
fn five_states(state: &FlowState, delta: f64, config: &FlowConfig) -> Result<Vec<FlowState>> {
    let mut out = vec![state.clone()];
    for _ in 0..4 {
        let next = advance(out.last().expect("nonempty"), delta, config)?;
        out.push(next);
    }
    Ok(out)
}

/// Fourth-order central difference at the middle of five equispaced samples.
fn central_derivative(f: [f64; 5], h: f64) -> f64 {
    (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h)
}

/// Residual of `∂_t̃ γ̃ = −(R̃ − 8π/A₀)γ̃` at `t + 2δ`, by fourth-order
/// central differences of the rescaled area density over `[t, t + 4δ]`.
pub fn volume_preserving_residual(state: &FlowState, delta: f64, config: &FlowConfig) -> Result<f64> {
    if !matches!(config.model, LightconeModel::DeSitter) {
        return Err(Error::RequiresDeSitter(config.model.name().into()));
    }
    let s = five_states(state, delta, config)?;
    let a0 = state.area0;
    let m: Vec<_> = s.iter().map(|s| s.omega.omega_squared().map(|m| m * a0 / s.area)).collect();
    let mid = &s[2];
    let c = a0 / mid.area;
    let r_tilde = scalar_curvature(&mid.omega).map(|r| r / c);
    let mean_r = 8.0 * PI / a0;
    let h = (s[4].t - s[0].t) / 4.0;
    let mut worst: f64 = 0.0;
    for i in 0..m[2].len() {
        let lhs = central_derivative(std::array::from_fn(|k| m[k].values()[i]), h) / c;
        let rhs = -(r_tilde.values()[i] - mean_r) * m[2].values()[i];
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Residual of `∂_t(ω²) = −½𝓗²ω²` at `t + 2δ`, by fourth-order central
/// differences.
pub fn metric_equation_residual(state: &FlowState, delta: f64, config: &FlowConfig) -> Result<f64> {
    let s = five_states(state, delta, config)?;
    let m: Vec<_> = s.iter().map(|s| s.omega.omega_squared()).collect();
    let h2 = spacetime_mean_curvature(&s[2].omega, &config.model)?;
    let h = (s[4].t - s[0].t) / 4.0;
    let mut worst: f64 = 0.0;
    for i in 0..m[2].len() {
        let lhs = central_derivative(std::array::from_fn(|k| m[k].values()[i]), h);
        let rhs = -0.5 * h2.values()[i] * m[2].values()[i];
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Residual `max|∂_t ω − (−ω𝓗²/4)|` of a time-dependent family at `t`; the
/// time derivative is the fourth-order central difference with step `h`.
pub fn pde_residual(
    family: impl Fn(f64) -> Result<ConformalFactor>,
    t: f64,
    h: f64,
    model: &LightconeModel,
) -> Result<f64> {
    let w = (-2..=2).map(|k| family(t + k as f64 * h).map(|f| f.omega())).collect::<Result<Vec<_>>>()?;
    let expected = rhs(&family(t)?, model)?;
    let mut worst: f64 = 0.0;
    for i in 0..expected.len() {
        let d = central_derivative(std::array::from_fn(|k| w[k].values()[i]), h);
        worst = worst.max((d - expected.values()[i]).abs());
    }
    Ok(worst)
}
