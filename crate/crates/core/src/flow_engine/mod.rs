//! Null mean curvature flow `∂_t ω = −ω𝓗²/4` of cone cross sections,
//! with outcome classification, exact-law diagnostics and the rescalings to
//! volume-preserving and unnormalized 2d Ricci flow.

mod integrator;
mod laws;
mod output;
mod rescale;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conformal_geometry::{mean_curvature_from_curvature, scalar_curvature, spacetime_mean_curvature, ConformalFactor, LightconeModel};
use crate::error::{Error, Result};
use crate::exact_solutions::ricci_time;
use crate::sphere_field::{ScalarField, SphericalGrid};
use integrator::{FlowIntegrator, SpectralState};

pub use laws::{area_closed_form, area_law_check, predict_tmax, t_tilde_closed_form, t_tilde_limit};
pub use output::{write_csv, FlowRecord, FlowSummary, CSV_COLUMNS};
pub use rescale::{
    metric_equation_residual, pde_residual, rescale_volume_preserving, volume_preserving_residual, RescaledState,
};

/// Area above which a run is certified as expanding, `100·4π`.
pub const EXPANSION_AREA: f64 = 400.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Classical Runge–Kutta with a step bound `∝ min m / lmax²`.
    #[default]
    Rk4,
    /// ARS(2,2,2) with a stabilized implicit Laplacian; step bound `∝ min m`.
    Imex,
}

#[derive(Clone, Debug)]
pub struct FlowConfig {
    pub model: LightconeModel,
    pub scheme: Scheme,
    /// Initial and largest time step.
    pub dt_init: f64,
    pub cfl_safety: f64,
    pub t_end: f64,
    pub stop_area_floor: f64,
    pub roundness_tol: f64,
    /// Bound on `max|𝓗²|` for the MOTS certificate.
    pub h2_tol: f64,
    /// Record every n-th step (the final state is always recorded).
    pub record_every: usize,
    /// Form nonlinear terms on a 3/2-padded grid.
    pub dealias: bool,
    /// Stop as soon as an outcome is certified.
    pub stop_on_certificate: bool,
    pub max_steps: usize,
}

impl FlowConfig {
    pub fn new(model: LightconeModel) -> Self {
        Self {
            model,
            scheme: Scheme::Rk4,
            dt_init: 1e-2,
            cfl_safety: 0.9,
            t_end: 1.0,
            stop_area_floor: 1e-4 * 4.0 * PI,
            roundness_tol: 1e-4,
            h2_tol: 1e-4,
            record_every: 10,
            dealias: true,
            stop_on_certificate: true,
            max_steps: 50_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt_init", self.dt_init),
            ("stop_area_floor", self.stop_area_floor),
            ("roundness_tol", self.roundness_tol),
            ("h2_tol", self.h2_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParameter(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!("t_end must be finite and ≥ 0, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// A recorded point of a run.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    pub omega: ConformalFactor,
    pub area: f64,
    /// Area at `t = 0`, the reference of the scaling factor `c = A₀/A`.
    pub area0: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub h2_min: f64,
    pub h2_max: f64,
    pub roundness: f64,
    /// `∫₀^t A₀/A(s) ds`, accumulated by the integrator.
    pub t_tilde: f64,
    /// `½(1 − e^{−2t})`.
    pub t_hat: f64,
    /// Size of the step that produced this state.
    pub dt: f64,
}

impl FlowState {
    /// Evaluates the diagnostics of `omega` at time `t`.
    pub fn new(t: f64, omega: ConformalFactor, model: &LightconeModel, area0: f64, t_tilde: f64, dt: f64) -> Result<Self> {
        let r = scalar_curvature(&omega);
        let h2 = mean_curvature_from_curvature(&omega, &r, model)?;
        let area = crate::conformal_geometry::area(&omega);
        Ok(Self {
            t,
            area,
            area0,
            r_min: r.min(),
            r_max: r.max(),
            h2_min: h2.min(),
            h2_max: h2.max(),
            roundness: r.max() - r.min(),
            t_tilde,
            t_hat: ricci_time(t),
            dt,
            omega,
        })
    }

    /// Initial state at `t = 0`.
    pub fn initial(omega: ConformalFactor, model: &LightconeModel) -> Result<Self> {
        let a0 = crate::conformal_geometry::area(&omega);
        Self::new(0.0, omega, model, a0, 0.0, 0.0)
    }

    pub fn h2_max_abs(&self) -> f64 {
        self.h2_min.abs().max(self.h2_max.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    ShrinksToTip { t_max_observed: f64, t_max_predicted: f64 },
    #[serde(rename = "converges-to-mots")]
    ConvergesToMots,
    ExpandsToInfinity,
    Running,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::ShrinksToTip { .. } => "shrinks-to-tip",
            Outcome::ConvergesToMots => "converges-to-mots",
            Outcome::ExpandsToInfinity => "expands-to-infinity",
            Outcome::Running => "running",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlowSeries {
    pub model: LightconeModel,
    pub area0: f64,
    pub states: Vec<FlowState>,
    pub outcome: Outcome,
    pub steps: usize,
}

impl FlowSeries {
    pub fn last(&self) -> &FlowState {
        self.states.last().expect("a series has at least one state")
    }
}

/// `∂_t ω = −ω𝓗²/4`, nodewise.
pub fn rhs(omega: &ConformalFactor, model: &LightconeModel) -> Result<ScalarField> {
    let h2 = spacetime_mean_curvature(omega, model)?;
    Ok(h2.zip_with(&omega.omega(), |h, w| -0.25 * w * h)?)
}

/// `max R − min R`.
pub fn roundness(omega: &ConformalFactor) -> f64 {
    let r = scalar_curvature(omega);
    r.max() - r.min()
}

fn to_spectral(omega: &ConformalFactor) -> crate::sphere_field::SpectralField {
    omega.omega_squared().spectral()
}

fn state_from_spectral(integ: &FlowIntegrator, s: &SpectralState) -> Result<FlowState> {
    let grid: &Arc<SphericalGrid> = &integ.grid;
    let nodal = grid.synthesize(&s.m);
    if let Some(v) = nodal.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::IntegratorDivergence { t: s.t, area: s.area(), reason: format!("area density reached {v}") });
    }
    let u = ScalarField::new(grid.clone(), nodal.iter().map(|v| 0.5 * v.ln()).collect())?;
    FlowState::new(s.t, ConformalFactor::from_log(u), &integ.config().model, s.area0, s.t_tilde, s.last_dt)
}

/// Advances a recorded state by a single step.
pub fn step(state: &FlowState, config: &FlowConfig) -> Result<FlowState> {
    config.validate()?;
    let integ = FlowIntegrator::new(state.omega.grid(), config)?;
    let s = SpectralState {
        t: state.t,
        m: to_spectral(&state.omega),
        t_tilde: state.t_tilde,
        area0: state.area0,
        last_dt: state.dt,
        rhs: None,
    };
    let next = integ.step(&s, f64::INFINITY)?;
    state_from_spectral(&integ, &next)
}

/// Advances a recorded state by exactly `duration`, in as many steps as the
/// stability bound requires.
pub fn advance(state: &FlowState, duration: f64, config: &FlowConfig) -> Result<FlowState> {
    config.validate()?;
    let integ = FlowIntegrator::new(state.omega.grid(), config)?;
    let mut s = SpectralState {
        t: state.t,
        m: to_spectral(&state.omega),
        t_tilde: state.t_tilde,
        area0: state.area0,
        last_dt: state.dt,
        rhs: None,
    };
    let t_target = state.t + duration;
    while s.t < t_target {
        let remaining = t_target - s.t;
        s = integ.step(&s, remaining)?;
        if t_target - s.t < 1e-14 * t_target.abs().max(1.0) {
            s.t = t_target;
        }
    }
    state_from_spectral(&integ, &s)
}

/// Integrates from `omega0` at `t = 0` until `t_end`, extinction, or a
/// certified outcome.
pub fn run(omega0: &ConformalFactor, config: &FlowConfig) -> Result<FlowSeries> {
    config.validate()?;
    let integ = FlowIntegrator::new(omega0.grid(), config)?;
    let mut s = integ.initial_state(to_spectral(omega0));
    let area0 = s.area0;
    if !(area0 > config.stop_area_floor) {
        return Err(Error::InvalidParameter(format!(
            "initial area {area0} is not above the stop floor {}",
            config.stop_area_floor
        )));
    }
    let mut states = vec![state_from_spectral(&integ, &s)?];
    let mut steps = 0usize;
    let mut outcome = None;
    let tol_t = 1e-12 * config.t_end.max(1.0);

    while s.t < config.t_end - tol_t {
        if steps >= config.max_steps {
            return Err(Error::IntegratorDivergence { t: s.t, area: s.area(), reason: format!("step limit {steps} reached") });
        }
        s = integ.step(&s, config.t_end - s.t)?;
        steps += 1;
        let area = s.area();
        if !area.is_finite() {
            return Err(Error::IntegratorDivergence { t: s.t, area, reason: "non-finite area".into() });
        }
        if area <= config.stop_area_floor {
            let predicted = predict_tmax(area0, &config.model);
            match predicted {
                Some(tp) if (s.t - tp).abs() <= 0.02 * tp => {
                    if let Ok(st) = state_from_spectral(&integ, &s) {
                        states.push(st);
                    }
                    outcome = Some(Outcome::ShrinksToTip { t_max_observed: s.t, t_max_predicted: tp });
                    break;
                }
                _ => return Err(Error::UnexplainedExtinction { t: s.t, predicted }),
            }
        }
        let expanding = area > EXPANSION_AREA;
        if steps % config.record_every == 0 || (expanding && config.stop_on_certificate) {
            let st = state_from_spectral(&integ, &s)?;
            let mots = st.roundness < config.roundness_tol && st.h2_max_abs() < config.h2_tol;
            states.push(st);
            if config.stop_on_certificate {
                if expanding {
                    outcome = Some(Outcome::ExpandsToInfinity);
                    break;
                }
                if mots {
                    outcome = Some(Outcome::ConvergesToMots);
                    break;
                }
            }
        }
    }
    if states.last().map(|st| st.t) != Some(s.t) && outcome.is_none() {
        states.push(state_from_spectral(&integ, &s)?);
    }
    let outcome = outcome.unwrap_or_else(|| {
        let last = states.last().expect("recorded");
        if last.roundness < config.roundness_tol && last.h2_max_abs() < config.h2_tol {
            Outcome::ConvergesToMots
        } else if last.area > EXPANSION_AREA {
            Outcome::ExpandsToInfinity
        } else {
            Outcome::Running
        }
    });
    Ok(FlowSeries { model: config.model.clone(), area0, states, outcome, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_solutions::{sphere_solution, stcmc_factor, StcmcParams};
    use crate::sphere_field::synthesize_random;

    fn grid() -> Arc<SphericalGrid> {
        SphericalGrid::new(16, 32).unwrap()
    }

    #[test]
    fn rhs_of_round_spheres() {
        let g = grid();
        for b in [0.5, 1.0, 2.0] {
            let w = ConformalFactor::constant(&g, b).unwrap();
            let ds = rhs(&w, &LightconeModel::DeSitter).unwrap();
            assert!((ds.max() - (b * b - 1.0) / b).abs() < 1e-12 && (ds.min() - (b * b - 1.0) / b).abs() < 1e-12);
            let mk = rhs(&w, &LightconeModel::Minkowski).unwrap();
            assert!((mk.max() + 1.0 / b).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_rhs_matches_nodal_rhs() {
        // ∂_t m = 2ω ∂_t ω
        let g = SphericalGrid::default_grid();
        let w = ConformalFactor::from_log(synthesize_random(&g, 3, 6, 0.05).unwrap());
        for model in [LightconeModel::DeSitter, LightconeModel::Minkowski, LightconeModel::AntiDeSitter] {
            let mut cfg = FlowConfig::new(model.clone());
            cfg.dealias = false;
            let integ = FlowIntegrator::new(&g, &cfg).unwrap();
            let m = w.omega_squared().spectral();
            let dm = ScalarField::from_spectral(&g, &integ.rhs(&m, 0.0).unwrap().value);
            let dw = rhs(&w, &model).unwrap();
            let expected = dw.zip_with(&w.omega(), |d, w| 2.0 * w * d).unwrap();
            let err = dm.zip_with(&expected, |a, b| a - b).unwrap().max_abs();
            assert!(err < 1e-6, "{model}: {err}");
        }
    }

    #[test]
    fn stationary_mots_step() {
        let g = grid();
        let s0 = FlowState::initial(ConformalFactor::constant(&g, 1.0).unwrap(), &LightconeModel::DeSitter).unwrap();
        let s1 = step(&s0, &FlowConfig::new(LightconeModel::DeSitter)).unwrap();
        assert!(s1.t > 0.0);
        assert!(s1.omega.log_omega().max_abs() < 1e-12);
    }

    #[test]
    fn expanding_and_shrinking_steps() {
        let g = grid();
        let cfg = FlowConfig::new(LightconeModel::DeSitter);
        for (b, grows) in [(2.0, true), (0.5, false)] {
            let s0 = FlowState::initial(ConformalFactor::constant(&g, b).unwrap(), &cfg.model).unwrap();
            let s1 = step(&s0, &cfg).unwrap();
            assert_eq!(s1.omega.omega().max() > b, grows);
        }
    }

    #[test]
    fn round_solutions_track_closed_form() {
        let g = grid();
        for b0 in [0.5, 2.0] {
            let mut cfg = FlowConfig::new(LightconeModel::DeSitter);
            cfg.t_end = 0.1;
            cfg.dt_init = 2e-3;
            cfg.record_every = 1;
            let series = run(&ConformalFactor::constant(&g, b0).unwrap(), &cfg).unwrap();
            for st in &series.states {
                let b = sphere_solution(b0, st.t).unwrap();
                let w = st.omega.omega();
                assert!((w.max() - b).abs() < 1e-10 && (w.min() - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn stcmc_stays_stcmc() {
        let g = grid();
        let p = StcmcParams::new(1.2, [0.2, 0.0, -0.1]).unwrap();
        let mut cfg = FlowConfig::new(LightconeModel::DeSitter);
        cfg.t_end = 0.05;
        let series = run(&stcmc_factor(&p, &g).unwrap(), &cfg).unwrap();
        let last = series.last();
        let b = sphere_solution(1.2, last.t).unwrap();
        let target = stcmc_factor(&StcmcParams { b, ..p }, &g).unwrap().omega();
        let err = last.omega.omega().zip_with(&target, |a, b| a - b).unwrap().max_abs();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn minkowski_extinction() {
        let g = grid();
        let mut cfg = FlowConfig::new(LightconeModel::Minkowski);
        cfg.t_end = 1.0;
        let series = run(&ConformalFactor::constant(&g, 1.0).unwrap(), &cfg).unwrap();
        match series.outcome {
            Outcome::ShrinksToTip { t_max_observed, t_max_predicted } => {
                assert!((t_max_predicted - 0.5).abs() < 1e-15);
                assert!((t_max_observed - 0.5).abs() < 0.01);
            }
            o => panic!("{o:?}"),
        }
        assert!(area_law_check(&series).unwrap() < 1e-8);
    }

    #[test]
    fn class_s_extinction_is_unexplained() {
        let g = grid();
        let model = LightconeModel::ClassS {
            h: crate::conformal_geometry::HProfile::custom(|_| 1.0),
            bracket: (0.0, f64::INFINITY),
        };
        let mut cfg = FlowConfig::new(model);
        cfg.t_end = 1.0;
        let err = run(&ConformalFactor::constant(&g, 1.0).unwrap(), &cfg).unwrap_err();
        assert!(matches!(err, Error::UnexplainedExtinction { predicted: None, .. }));
    }

    #[test]
    fn config_validation() {
        let mut cfg = FlowConfig::new(LightconeModel::DeSitter);
        cfg.cfl_safety = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = FlowConfig::new(LightconeModel::DeSitter);
        cfg.record_every = 0;
        assert!(cfg.validate().is_err());
    }
}
