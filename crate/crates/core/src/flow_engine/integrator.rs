//! Spectral time stepping of the flow in the area-density variable
//! `m = ω²`, for which the flow reads `∂_t m = Δ ln m − 2h(√m)`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{FlowConfig, Scheme};
use crate::conformal_geometry::LightconeModel;
use crate::error::{Error, Result};
use crate::sphere_field::{SpectralField, SphericalGrid};

/// Linear stability radius of classical RK4 on the negative real axis.
const RK4_STABILITY: f64 = 2.785;
/// Step bound of the IMEX scheme in units of the smallest `m`.
const IMEX_STEP: f64 = 0.05;
const MAX_HALVINGS: usize = 40;

/// Evaluations of the right-hand side at one state.
#[derive(Clone, Debug)]
pub(crate) struct Rhs {
    pub value: SpectralField,
    /// `max 1/m` over the evaluation grid; the diffusivity of `Δ ln m`.
    pub max_inv_m: f64,
}

/// Integrator state between steps.
#[derive(Clone, Debug)]
pub(crate) struct SpectralState {
    pub t: f64,
    pub m: SpectralField,
    pub t_tilde: f64,
    pub area0: f64,
    pub last_dt: f64,
    pub rhs: Option<Rhs>,
}

impl SpectralState {
    pub fn area(&self) -> f64 {
        self.m.integral()
    }
}

pub(crate) struct FlowIntegrator {
    pub grid: Arc<SphericalGrid>,
    eval_grid: Arc<SphericalGrid>,
    config: FlowConfig,
}

enum StepFailure {
    /// The trial state is not admissible; retry with a smaller step.
    Retry(Error),
    Fatal(Error),
}

impl FlowIntegrator {
    pub fn new(grid: &Arc<SphericalGrid>, config: &FlowConfig) -> Result<Self> {
        let eval_grid = if config.dealias {
            let nlat = (3 * grid.nlat()).div_ceil(2);
            let nlon = (3 * grid.nlon()).div_ceil(2).max(2 * nlat);
            SphericalGrid::with_lmax(nlat, nlon, grid.lmax())?
        } else {
            grid.clone()
        };
        Ok(Self { grid: grid.clone(), eval_grid, config: config.clone() })
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    /// `Δ ln m − 2h(√m)` in spectral form. Nonlinear terms are formed on the
    /// (padded) evaluation grid and truncated back to the state's `lmax`.
    pub fn rhs(&self, m: &SpectralField, t: f64) -> Result<Rhs> {
        let g = &self.eval_grid;
        let lmax = m.lmax();
        let nodal = g.synthesize(m);
        let mut min_m = f64::INFINITY;
        for &v in &nodal {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::IntegratorDivergence {
                    t,
                    area: m.integral(),
                    reason: format!("area density reached {v}"),
                });
            }
            min_m = min_m.min(v);
        }
        let mut log_m: Vec<f64> = nodal.iter().map(|v| v.ln()).collect();
        let mean = g.integrate_values(&log_m) / (4.0 * PI);
        log_m.iter_mut().for_each(|v| *v -= mean);
        let mut value = g.analyze_to(&log_m, lmax).laplacian();
        let unit = (4.0 * PI).sqrt();
        match &self.config.model {
            LightconeModel::Minkowski => value.coeffs_mut()[0].re -= 2.0 * unit,
            LightconeModel::DeSitter => {
                value.coeffs_mut()[0].re -= 2.0 * unit;
                value.axpy(2.0, m);
            }
            LightconeModel::AntiDeSitter => {
                value.coeffs_mut()[0].re -= 2.0 * unit;
                value.axpy(-2.0, m);
            }
            model @ LightconeModel::ClassS { h, .. } => {
                let max_m = nodal.iter().copied().fold(0.0, f64::max);
                model.check_range(min_m.sqrt(), max_m.sqrt())?;
                let q: Vec<f64> = nodal.iter().map(|v| -2.0 * h.eval(v.sqrt())).collect();
                value.axpy(1.0, &g.analyze_to(&q, lmax));
            }
        }
        Ok(Rhs { value, max_inv_m: 1.0 / min_m })
    }

    /// Largest step allowed by the scheme at the given diffusivity.
    pub fn stable_dt(&self, max_inv_m: f64) -> f64 {
        let c = &self.config;
        let bound = match c.scheme {
            Scheme::Rk4 => {
                let l = self.grid.lmax() as f64;
                c.cfl_safety * RK4_STABILITY / (max_inv_m * l * (l + 1.0)).max(f64::MIN_POSITIVE)
            }
            Scheme::Imex => c.cfl_safety * IMEX_STEP / max_inv_m,
        };
        c.dt_init.min(bound)
    }

    pub fn initial_state(&self, m: SpectralField) -> SpectralState {
        let area0 = m.integral();
        SpectralState { t: 0.0, m, t_tilde: 0.0, area0, last_dt: 0.0, rhs: None }
    }

    /// One step of at most `dt_cap`, halving on inadmissible trial states.
    pub fn step(&self, state: &SpectralState, dt_cap: f64) -> Result<SpectralState> {
        let k1 = match &state.rhs {
            Some(r) => r.clone(),
            None => self.rhs(&state.m, state.t)?,
        };
        let mut dt = self.stable_dt(k1.max_inv_m).min(dt_cap);
        let mut last_err = None;
        for _ in 0..MAX_HALVINGS {
            let trial = match self.config.scheme {
                Scheme::Rk4 => self.rk4(state, &k1, dt),
                Scheme::Imex => self.imex(state, &k1, dt),
            };
            match trial {
                Ok(next) => return Ok(next),
                Err(StepFailure::Fatal(e)) => return Err(e),
                Err(StepFailure::Retry(e)) => {
                    last_err = Some(e);
                    dt *= 0.5;
                }
            }
        }
        Err(last_err.unwrap_or_else(|| Error::IntegratorDivergence {
            t: state.t,
            area: state.area(),
            reason: "step size underflow".into(),
        }))
    }

    fn stage(&self, m: &SpectralField, t: f64) -> std::result::Result<Rhs, StepFailure> {
        self.rhs(m, t).map_err(|e| match e {
            Error::IntegratorDivergence { .. } => StepFailure::Retry(e),
            other => StepFailure::Fatal(other),
        })
    }

    /// Accepts a trial state if its area density is admissible; below the
    /// area floor the state is returned as is for the caller to classify.
    fn finish(&self, state: &SpectralState, m: SpectralField, dt: f64, dtt: f64) -> std::result::Result<SpectralState, StepFailure> {
        let t = state.t + dt;
        let area = m.integral();
        let rhs = if area.is_finite() && area <= self.config.stop_area_floor && area > 0.0 {
            None
        } else {
            Some(self.stage(&m, t)?)
        };
        Ok(SpectralState { t, m, t_tilde: state.t_tilde + dtt, area0: state.area0, last_dt: dt, rhs })
    }

    fn rk4(&self, s: &SpectralState, k1: &Rhs, dt: f64) -> std::result::Result<SpectralState, StepFailure> {
        let c = |m: &SpectralField| s.area0 / m.integral();
        let mut m2 = s.m.clone();
        m2.axpy(0.5 * dt, &k1.value);
        let k2 = self.stage(&m2, s.t + 0.5 * dt)?;
        let mut m3 = s.m.clone();
        m3.axpy(0.5 * dt, &k2.value);
        let k3 = self.stage(&m3, s.t + 0.5 * dt)?;
        let mut m4 = s.m.clone();
        m4.axpy(dt, &k3.value);
        let k4 = self.stage(&m4, s.t + dt)?;
        let mut m = s.m.clone();
        m.axpy(dt / 6.0, &k1.value);
        m.axpy(dt / 3.0, &k2.value);
        m.axpy(dt / 3.0, &k3.value);
        m.axpy(dt / 6.0, &k4.value);
        let dtt = dt / 6.0 * (c(&s.m) + 2.0 * c(&m2) + 2.0 * c(&m3) + c(&m4));
        self.finish(s, m, dt, dtt)
    }

    /// ARS(2,2,2) with the stabilizing term `κΔm`, `κ = max 1/m`, implicit.
    fn imex(&self, s: &SpectralState, k1: &Rhs, dt: f64) -> std::result::Result<SpectralState, StepFailure> {
        let gamma = 1.0 - 0.5f64.sqrt();
        let delta = 1.0 - 1.0 / (2.0 * gamma);
        let kappa = k1.max_inv_m;
        let solve = |mut rhs: SpectralField| {
            rhs.scale_by_degree(|l| 1.0 / (1.0 + dt * gamma * kappa * (l * (l + 1)) as f64));
            rhs
        };
        let stiff = |m: &SpectralField| m.laplacian().scaled(kappa);

        let e1 = {
            let mut e = k1.value.clone();
            e.axpy(-1.0, &stiff(&s.m));
            e
        };
        let mut r2 = s.m.clone();
        r2.axpy(dt * gamma, &e1);
        let y2 = solve(r2);
        let k2 = self.stage(&y2, s.t + gamma * dt)?;
        let i2 = stiff(&y2);
        let mut e2 = k2.value.clone();
        e2.axpy(-1.0, &i2);

        let mut r3 = s.m.clone();
        r3.axpy(dt * delta, &e1);
        r3.axpy(dt * (1.0 - delta), &e2);
        r3.axpy(dt * (1.0 - gamma), &i2);
        let y3 = solve(r3);

        // quadrature of c on the stage times {0, γ, 1}, exact for quadratics
        let w_mid = 1.0 / (6.0 * gamma * (1.0 - gamma));
        let w_end = 0.5 - gamma * w_mid;
        let w_start = 1.0 - w_mid - w_end;
        let c = |m: &SpectralField| s.area0 / m.integral();
        let dtt = dt * (w_start * c(&s.m) + w_mid * c(&y2) + w_end * c(&y3));
        self.finish(s, y3, dt, dtt)
    }
}
