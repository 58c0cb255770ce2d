//! Closed-form solutions and symmetries of the de Sitter flow: STCMC factors,
//! round-sphere solutions, the ancient solutions obtained from 2d Ricci flow
//! (shrinking spheres and King–Rosenau), and the Lorentz action on cone cross
//! sections.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conformal_geometry::{scalar_curvature, ConformalFactor};
use crate::error::{Error, Result};
use crate::sphere_field::{ScalarField, SpectralField, SphericalGrid};

/// Parameters `(b, a)` of the STCMC factor `ω(x) = b/(√(1+|a|²) − a·x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StcmcParams {
    pub b: f64,
    #[serde(default)]
    pub a: [f64; 3],
}

impl StcmcParams {
    pub fn new(b: f64, a: [f64; 3]) -> Result<Self> {
        let p = Self { b, a };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(Error::InvalidParameter(format!("STCMC radius b must be positive, got {}", self.b)));
        }
        if self.a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("STCMC vector a must be finite".into()));
        }
        Ok(())
    }

    /// `ω(x)` at a unit vector `x`.
    pub fn omega_at(&self, x: [f64; 3]) -> f64 {
        let na = (1.0 + dot(self.a, self.a)).sqrt();
        self.b / (na - dot(self.a, x))
    }
}

/// A boost of the restricted Lorentz group acting on the cone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzBoost {
    pub direction: [f64; 3],
    pub rapidity: f64,
}

impl LorentzBoost {
    /// Normalizes `direction`; fails for a zero or non-finite direction.
    pub fn new(direction: [f64; 3], rapidity: f64) -> Result<Self> {
        let n = dot(direction, direction).sqrt();
        if !(n > 0.0) || !n.is_finite() || !rapidity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "boost needs a nonzero finite direction and finite rapidity, got {direction:?}, {rapidity}"
            )));
        }
        Ok(Self { direction: direction.map(|c| c / n), rapidity })
    }

    pub fn identity() -> Self {
        Self { direction: [0.0, 0.0, 1.0], rapidity: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let n = dot(self.direction, self.direction).sqrt();
        if (n - 1.0).abs() > 1e-12 || !self.rapidity.is_finite() {
            return Err(Error::InvalidParameter(format!("boost direction must be a unit vector, |n| = {n}")));
        }
        Ok(())
    }

    /// For a point `y` of the sphere, returns `(x, μ)` with `φ(x) = y` and
    /// `μ = 1/λ(x)`, where `L(1, x) = λ(x)(1, φ(x))`.
    pub fn pull_back(&self, y: [f64; 3]) -> ([f64; 3], f64) {
        let n = self.direction;
        let (ch, sh) = (self.rapidity.cosh(), self.rapidity.sinh());
        let ny = dot(n, y);
        let mu = ch - sh * ny;
        let mut x = [0.0; 3];
        for k in 0..3 {
            x[k] = (y[k] + (ch - 1.0) * ny * n[k] - sh * n[k]) / mu;
        }
        (x, mu)
    }

    /// The image of the round unit sphere: `stcmc(1, sinh(s)·n)`.
    pub fn stcmc_of_unit_sphere(&self) -> StcmcParams {
        StcmcParams { b: 1.0, a: self.direction.map(|c| c * self.rapidity.sinh()) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AncientKind {
    ShrinkingSphere,
    KingRosenau,
}

/// An ancient solution `ω(t) = e^t ω̂(t̂(t) − t̂₀)`, optionally boosted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AncientSolution {
    pub kind: AncientKind,
    pub t_hat_offset: f64,
    #[serde(default)]
    pub boost: Option<LorentzBoost>,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `ln sinh s` for `s > 0`, without overflow.
fn ln_sinh(s: f64) -> f64 {
    if s > 1.0 {
        s + (-(-2.0 * s).exp()).ln_1p() - std::f64::consts::LN_2
    } else {
        s.sinh().ln()
    }
}

/// `ln(1 + e^x)`.
fn ln_1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Samples the STCMC factor on `grid`.
pub fn stcmc_factor(p: &StcmcParams, grid: &Arc<SphericalGrid>) -> Result<ConformalFactor> {
    p.validate()?;
    Ok(ConformalFactor::from_log(ScalarField::from_points(grid, |x| p.omega_at(x).ln())))
}

/// Radius `b(t) = √(1 + e^{2t}(b₀² − 1))` of the round flow solution.
pub fn sphere_solution(b0: f64, t: f64) -> Result<f64> {
    if !(b0 > 0.0) {
        return Err(Error::InvalidParameter(format!("b0 must be positive, got {b0}")));
    }
    let radicand = 1.0 + (2.0 * t).exp() * (b0 * b0 - 1.0);
    if !(radicand > 0.0) {
        return Err(Error::PastExtinction { t });
    }
    Ok(radicand.sqrt())
}

/// Extinction time `½ ln(1/(1 − b₀²))` of a round solution with `b₀ < 1`.
pub fn sphere_extinction_time(b0: f64) -> Option<f64> {
    (b0 > 0.0 && b0 < 1.0).then(|| -0.5 * (-b0 * b0).ln_1p())
}

/// Ricci-flow time `t̂(t) = ½(1 − e^{−2t})`.
pub fn ricci_time(t: f64) -> f64 {
    -0.5 * (-2.0 * t).exp_m1()
}

/// Inverse of [`ricci_time`], defined for `t̂ < ½`.
pub fn physical_time(t_hat: f64) -> f64 {
    -0.5 * (-2.0 * t_hat).ln_1p()
}

/// `ln ω̂` of the Ricci-flow profile at Ricci time `t̂ = −s < 0`, at a point
/// whose cosine of the colatitude is `z`.
pub fn ancient_log_profile(kind: AncientKind, s: f64, z: f64) -> f64 {
    match kind {
        AncientKind::ShrinkingSphere => 0.5 * (2.0 * s).ln(),
        AncientKind::KingRosenau => {
            let q = (1.0 - z * z).max(0.0);
            let denom = if q == 0.0 { 0.0 } else { ln_1p_exp(q.ln() + 2.0 * ln_sinh(0.5 * s)) };
            0.5 * (std::f64::consts::LN_2 + ln_sinh(s) - denom)
        }
    }
}

/// Samples `ω̂(t̂)` of the Ricci-flow ancient solution; requires `t̂ < 0`.
pub fn ancient_profile(kind: AncientKind, t_hat: f64, grid: &Arc<SphericalGrid>) -> Result<ConformalFactor> {
    if !(t_hat < 0.0) {
        return Err(Error::PastExtinction { t: t_hat });
    }
    let s = -t_hat;
    Ok(ConformalFactor::from_log(ScalarField::from_points(grid, |x| ancient_log_profile(kind, s, x[2]))))
}

impl AncientSolution {
    pub fn new(kind: AncientKind, t_hat_offset: f64, boost: Option<LorentzBoost>) -> Result<Self> {
        let sol = Self { kind, t_hat_offset, boost };
        sol.validate()?;
        Ok(sol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_hat_offset > 0.0) || !self.t_hat_offset.is_finite() {
            return Err(Error::InvalidParameter(format!("t_hat_offset must be positive, got {}", self.t_hat_offset)));
        }
        if let Some(b) = &self.boost {
            b.validate()?;
        }
        Ok(())
    }

    /// `s = t̂₀ − t̂(t)`, the distance to the Ricci-flow extinction.
    pub fn ricci_gap(&self, t: f64) -> f64 {
        (self.t_hat_offset - 0.5) + 0.5 * (-2.0 * t).exp()
    }

    /// Physical extinction time, finite only for `t̂₀ < ½`.
    pub fn extinction_time(&self) -> Option<f64> {
        (self.t_hat_offset < 0.5).then(|| physical_time(self.t_hat_offset))
    }

    /// `|Σ_t| = 8π(½ + (t̂₀ − ½)e^{2t})`; boosts preserve area.
    pub fn area(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(8.0 * PI * (0.5 + (self.t_hat_offset - 0.5) * (2.0 * t).exp()))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(self.ricci_gap(t) > 0.0) {
            return Err(Error::PastExtinction { t });
        }
        Ok(())
    }

    /// `ln ω(t, y)` at a unit vector `y`.
    pub fn log_omega_at(&self, t: f64, y: [f64; 3]) -> f64 {
        let s = self.ricci_gap(t);
        match &self.boost {
            None => t + ancient_log_profile(self.kind, s, y[2]),
            Some(b) => {
                let (x, mu) = b.pull_back(y);
                t + ancient_log_profile(self.kind, s, x[2]) - mu.ln()
            }
        }
    }
}

/// The ancient flow solution at physical time `t`, sampled on `grid`.
pub fn nmcf_from_ancient(sol: &AncientSolution, t: f64, grid: &Arc<SphericalGrid>) -> Result<ConformalFactor> {
    sol.validate()?;
    sol.check_time(t)?;
    Ok(ConformalFactor::from_log(ScalarField::from_points(grid, |y| sol.log_omega_at(t, y))))
}

/// Action of a boost on a cross section: `ω′(y) = ω(x)/μ(y)` with `x` the
/// preimage of `y`. `ln ω` is interpolated spectrally at the preimages.
pub fn mobius_transform(omega: &ConformalFactor, boost: &LorentzBoost) -> ConformalFactor {
    let grid = omega.grid();
    let coeffs = omega.log_omega().spectral();
    let mut buf = vec![0.0; SpectralField::len_for(coeffs.lmax())];
    let values = (0..grid.len())
        .map(|i| {
            let (x, mu) = boost.pull_back(grid.node_point(i));
            let r = dot(x, x).sqrt();
            coeffs.evaluate_at_point(x.map(|c| c / r), &mut buf) - mu.ln()
        })
        .collect();
    ConformalFactor::from_log(ScalarField::new(grid.clone(), values).expect("finite transformed factor"))
}

/// Residual `max|∂_t̂ ω̂² + R̂ ω̂²|` of the Ricci-flow profile at `t̂ < 0`,
/// with a fourth-order central difference of step `delta`.
pub fn ricci_flow_residual(kind: AncientKind, t_hat: f64, delta: f64, grid: &Arc<SphericalGrid>) -> Result<f64> {
    if !(delta > 0.0) || !(t_hat + 2.0 * delta < 0.0) {
        return Err(Error::InvalidParameter(format!("need δ > 0 and t̂ + 2δ < 0, got t̂ = {t_hat}, δ = {delta}")));
    }
    let m = (-2..=2)
        .map(|k| ancient_profile(kind, t_hat + k as f64 * delta, grid).map(|w| w.omega_squared()))
        .collect::<Result<Vec<_>>>()?;
    let mid = ancient_profile(kind, t_hat, grid)?;
    let r = scalar_curvature(&mid);
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let v = |k: usize| m[k].values()[i];
        let d = (v(0) - 8.0 * v(1) + 8.0 * v(3) - v(4)) / (12.0 * delta);
        worst = worst.max((d + r.values()[i] * v(2)).abs());
    }
    Ok(worst)
}
