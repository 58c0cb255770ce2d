//! Class-S machinery: horizons of `h`, the Kruskal-type extension across a
//! non-degenerate horizon, background leaves of the lightcone foliation and
//! the pseudosphere embeddings of de Sitter space.

mod chart;
mod pseudosphere;
mod quadrature;
mod riemann;

use serde::{Deserialize, Serialize};

use crate::conformal_geometry::{HProfile, LightconeModel};
use crate::error::{Error, Result};

pub use chart::{embed_cross_section, metric_components, solve_f, ChartOptions, KruskalChart};
pub use pseudosphere::{minkowski_norm, pseudosphere_embed, pseudosphere_pullback, Patch};
pub use riemann::{constant_curvature_defect, kruskal_metric, riemann_tensor, Metric4};

/// A simple zero `r` of `h` with `K = 1/h'(r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub r: f64,
    pub k: f64,
}

/// A class-S profile restricted to a bracket, with its horizons.
#[derive(Clone, Debug)]
pub struct ClassSModel {
    pub h: HProfile,
    pub bracket: (f64, f64),
    pub horizons: Vec<Horizon>,
}

impl ClassSModel {
    pub fn new(h: HProfile, bracket: (f64, f64)) -> Result<Self> {
        let horizons = find_horizons(&h, bracket)?;
        Ok(Self { h, bracket, horizons })
    }

    /// `h(r) = 1 − r²` on `(0, r_max)`.
    pub fn de_sitter(r_max: f64) -> Result<Self> {
        Self::new(HProfile::Laurent(crate::conformal_geometry::LaurentProfile::new(vec![(0, 1.0), (2, -1.0)])), (0.0, r_max))
    }

    /// The lightcone model on the part of the bracket between the horizons
    /// adjacent to `r`.
    pub fn lightcone_model(&self, r: f64) -> LightconeModel {
        let lo = self.horizons.iter().map(|h| h.r).filter(|&x| x < r).fold(self.bracket.0, f64::max);
        let hi = self.horizons.iter().map(|h| h.r).filter(|&x| x > r).fold(self.bracket.1, f64::min);
        LightconeModel::ClassS { h: self.h.clone(), bracket: (lo, hi) }
    }
}

const SAMPLES: usize = 4000;

/// All zeros of `h` in the open bracket. Sign changes are bisected and
/// polished by Newton; a zero of `h` without a sign change, or with
/// `h' ≈ 0`, is reported as degenerate.
pub fn find_horizons(h: &HProfile, bracket: (f64, f64)) -> Result<Vec<Horizon>> {
    let (a, b) = bracket;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("bracket must be a finite interval, got ({a}, {b})")));
    }
    let xs: Vec<f64> = (1..SAMPLES).map(|i| a + (b - a) * i as f64 / SAMPLES as f64).collect();
    let hs: Vec<f64> = xs.iter().map(|&x| h.eval(x)).collect();
    if let Some(i) = hs.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("h is not finite at r = {}", xs[i])));
    }
    let scale = hs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut out: Vec<Horizon> = Vec::new();
    for i in 0..xs.len() {
        if hs[i] == 0.0 {
            out.push(polish(h, xs[i], xs[i], xs[i])?);
            continue;
        }
        if i + 1 < xs.len() && hs[i] * hs[i + 1] < 0.0 {
            out.push(polish(h, xs[i], xs[i + 1], 0.5 * (xs[i] + xs[i + 1]))?);
            continue;
        }
        // touching zero: a local minimum of |h| that reaches zero
        if i > 0 && i + 1 < xs.len() && hs[i].abs() <= hs[i - 1].abs() && hs[i].abs() <= hs[i + 1].abs() {
            let r = golden_min(|x| h.eval(x).abs(), xs[i - 1], xs[i + 1]);
            if h.eval(r).abs() < 1e-10 * scale && hs[i - 1] * hs[i + 1] > 0.0 {
                return Err(Error::DegenerateHorizon { r, slope: h.derivative(r) });
            }
        }
    }
    out.dedup_by(|x, y| (x.r - y.r).abs() < 1e-12);
    Ok(out)
}

fn polish(h: &HProfile, mut lo: f64, mut hi: f64, start: f64) -> Result<Horizon> {
    let mut r = start;
    if lo < hi {
        let f_lo = h.eval(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h.eval(mid) * f_lo > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * mid.abs().max(1.0) {
                break;
            }
        }
        r = 0.5 * (lo + hi);
    }
    for _ in 0..5 {
        let d = h.derivative(r);
        if d == 0.0 {
            break;
        }
        let next = r - h.eval(r) / d;
        if (next - r).abs() > 1e-8 * r.abs().max(1.0) {
            break;
        }
        r = next;
    }
    let slope = h.derivative(r);
    if slope.abs() < 1e-8 {
        return Err(Error::DegenerateHorizon { r, slope });
    }
    Ok(Horizon { r, k: 1.0 / slope })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if (b - a).abs() < 1e-15 * a.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Coefficients of the background leaf `𝕊²_r` against `dΩ²`:
/// `γ = r²`, `χ̲ = r`, `χ = r h(r)`, `ζ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafData {
    pub gamma: f64,
    pub chi_bar: f64,
    pub chi: f64,
    pub zeta: f64,
}

impl LeafData {
    /// `θ̲ = 2χ̲/γ`.
    pub fn theta_bar(&self) -> f64 {
        2.0 * self.chi_bar / self.gamma
    }

    /// `θ = 2χ/γ`.
    pub fn theta(&self) -> f64 {
        2.0 * self.chi / self.gamma
    }

    pub fn h2(&self) -> f64 {
        self.theta_bar() * self.theta()
    }
}

pub fn background_leaf(model: &LightconeModel, r: f64) -> Result<LeafData> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("leaf radius must be positive, got {r}")));
    }
    model.check_range(r, r)?;
    Ok(LeafData { gamma: r * r, chi_bar: r, chi: r * model.h(r), zeta: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal_geometry::{spacetime_mean_curvature, ConformalFactor, LaurentProfile};
    use crate::sphere_field::SphericalGrid;

    #[test]
    fn de_sitter_horizon() {
        let hz = find_horizons(&HProfile::custom(|r| 1.0 - r * r), (0.0, 2.0)).unwrap();
        assert_eq!(hz.len(), 1);
        assert!((hz[0].r - 1.0).abs() < 1e-14);
        assert!((hz[0].k + 0.5).abs() < 1e-9);
        let exact = ClassSModel::de_sitter(2.0).unwrap();
        assert!((exact.horizons[0].k + 0.5).abs() < 1e-15);
    }

    #[test]
    fn anti_de_sitter_has_no_horizon() {
        assert!(find_horizons(&HProfile::custom(|r| 1.0 + r * r), (0.0, 10.0)).unwrap().is_empty());
    }

    #[test]
    fn degenerate_horizon_is_rejected() {
        let err = find_horizons(&HProfile::custom(|r| (1.0 - r) * (1.0 - r)), (0.0, 2.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateHorizon { r, .. } if (r - 1.0).abs() < 1e-4));
        // extremal Reissner–Nordström, M = Q
        let rn = HProfile::Laurent(LaurentProfile::reissner_nordstrom(1.0, 1.0));
        assert!(matches!(find_horizons(&rn, (0.1, 5.0)), Err(Error::DegenerateHorizon { .. })));
    }

    #[test]
    fn reissner_nordstrom_horizons() {
        let rn = HProfile::Laurent(LaurentProfile::reissner_nordstrom(1.0, 0.5));
        let hz = find_horizons(&rn, (0.05, 10.0)).unwrap();
        let d = 0.75f64.sqrt();
        assert_eq!(hz.len(), 2);
        assert!((hz[0].r - (1.0 - d)).abs() < 1e-13 && (hz[1].r - (1.0 + d)).abs() < 1e-13);
        for z in &hz {
            assert!(rn.eval(z.r).abs() < 1e-12);
            assert!((z.k * rn.derivative(z.r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn leaves() {
        let l = background_leaf(&LightconeModel::DeSitter, 1.0).unwrap();
        assert_eq!(l, LeafData { gamma: 1.0, chi_bar: 1.0, chi: 0.0, zeta: 0.0 });
        let l = background_leaf(&LightconeModel::Minkowski, 2.0).unwrap();
        assert_eq!(l, LeafData { gamma: 4.0, chi_bar: 2.0, chi: 2.0, zeta: 0.0 });
    }

    #[test]
    fn leaf_h2_matches_geometry() {
        let g = SphericalGrid::new(8, 16).unwrap();
        let rn = LightconeModel::ClassS {
            h: HProfile::Laurent(LaurentProfile::reissner_nordstrom(0.3, 0.1)),
            bracket: (0.1, 20.0),
        };
        for model in [LightconeModel::DeSitter, LightconeModel::Minkowski, LightconeModel::AntiDeSitter, rn] {
            for r in [0.5, 1.0, 1.7] {
                let leaf = background_leaf(&model, r).unwrap();
                let h2 = spacetime_mean_curvature(&ConformalFactor::constant(&g, r).unwrap(), &model).unwrap();
                assert!((h2.max() - leaf.h2()).abs() < 1e-12 && (h2.min() - leaf.h2()).abs() < 1e-12, "{model} {r}");
            }
        }
    }
}
