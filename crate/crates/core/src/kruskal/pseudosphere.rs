//! Static and cosmological patches of de Sitter space embedded in the unit
//! one-sheeted hyperboloid `{η(p, p) = 1}` of five-dimensional Minkowski space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Patch {
    /// `r ∈ (0, 1)`, `p = (√(1−r²) sinh t, √(1−r²) cosh t, r x)`.
    StaticPlus,
    StaticMinus,
    /// `r ∈ (1, ∞)`, `p = (√(r²−1) cosh t, √(r²−1) sinh t, r x)`.
    CosmologicalPlus,
    CosmologicalMinus,
}

impl Patch {
    pub const ALL: [Patch; 4] = [Patch::StaticPlus, Patch::StaticMinus, Patch::CosmologicalPlus, Patch::CosmologicalMinus];

    fn sign(self) -> f64 {
        match self {
            Patch::StaticPlus | Patch::CosmologicalPlus => 1.0,
            Patch::StaticMinus | Patch::CosmologicalMinus => -1.0,
        }
    }

    pub fn is_static(self) -> bool {
        matches!(self, Patch::StaticPlus | Patch::StaticMinus)
    }

    /// Open radius interval of the patch.
    pub fn radius_range(self) -> (f64, f64) {
        if self.is_static() {
            (0.0, 1.0)
        } else {
            (1.0, f64::INFINITY)
        }
    }
}

/// `η(p, p)` with signature `(−, +, +, +, +)`.
pub fn minkowski_norm(p: &[f64; 5]) -> f64 {
    -p[0] * p[0] + p[1..].iter().map(|v| v * v).sum::<f64>()
}

/// Embeds `(t, r, x)`, `x` a unit vector, into the hyperboloid.
pub fn pseudosphere_embed(patch: Patch, t: f64, r: f64, x: [f64; 3]) -> Result<[f64; 5]> {
    let (lo, hi) = patch.radius_range();
    if !(r > lo && r < hi) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("r = {r} outside ({lo}, {hi}) for {patch:?}, or t = {t} not finite")));
    }
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !((n - 1.0).abs() < 1e-12) {
        return Err(Error::InvalidParameter(format!("x must be a unit vector, |x| = {n}")));
    }
    let s = patch.sign();
    let (a, b) = if patch.is_static() {
        let w = (1.0 - r * r).sqrt();
        (s * w * t.sinh(), s * w * t.cosh())
    } else {
        let w = (r * r - 1.0).sqrt();
        (s * w * t.cosh(), s * w * t.sinh())
    };
    Ok([a, b, r * x[0], r * x[1], r * x[2]])
}

/// Pullback of `η` under `(t, r, θ, φ) ↦ p`, by central differences with
/// step `step`.
pub fn pseudosphere_pullback(patch: Patch, coords: [f64; 4], step: f64) -> Result<[[f64; 4]; 4]> {
    let embed = |c: [f64; 4]| {
        let (st, ct) = c[2].sin_cos();
        let (sp, cp) = c[3].sin_cos();
        pseudosphere_embed(patch, c[0], c[1], [st * cp, st * sp, ct])
    };
    let mut jac = [[0.0; 5]; 4];
    for (a, col) in jac.iter_mut().enumerate() {
        let (mut plus, mut minus) = (coords, coords);
        plus[a] += step;
        minus[a] -= step;
        let (p, m) = (embed(plus)?, embed(minus)?);
        for k in 0..5 {
            col[k] = (p[k] - m[k]) / (2.0 * step);
        }
    }
    let eta = |u: &[f64; 5], v: &[f64; 5]| -u[0] * v[0] + (1..5).map(|k| u[k] * v[k]).sum::<f64>();
    Ok(std::array::from_fn(|a| std::array::from_fn(|b| eta(&jac[a], &jac[b]))))
}
