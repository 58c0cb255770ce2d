use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ScalarField, SpectralField, SphericalGrid};
use crate::error::{Error, Result};

/// Deterministic band-limited random field with zero mean.
///
/// Every coefficient `a_lm` with `1 ≤ l ≤ lmax_pert` has modulus drawn
/// uniformly from `[0, amplitude]` and a uniform phase (real for `m = 0`).
pub fn synthesize_random(
    grid: &Arc<SphericalGrid>,
    seed: u64,
    lmax_pert: usize,
    amplitude: f64,
) -> Result<ScalarField> {
    Ok(ScalarField::from_spectral(grid, &random_coefficients(grid.lmax(), seed, lmax_pert, amplitude)?))
}

pub fn random_coefficients(lmax: usize, seed: u64, lmax_pert: usize, amplitude: f64) -> Result<SpectralField> {
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::InvalidParameter(format!("amplitude must be finite and ≥ 0, got {amplitude}")));
    }
    if lmax_pert > lmax {
        return Err(Error::InvalidParameter(format!("lmax_pert = {lmax_pert} exceeds grid lmax = {lmax}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = SpectralField::zeros(lmax);
    for l in 1..=lmax_pert {
        for m in 0..=l {
            let r = amplitude * rng.gen::<f64>();
            let phase = 2.0 * PI * rng.gen::<f64>();
            *c.get_mut(l, m) = if m == 0 {
                Complex64::new(r * phase.cos().signum(), 0.0)
            } else {
                Complex64::from_polar(r, phase)
            };
        }
    }
    Ok(c)
}

/// Sup-norm bound implied by the coefficient bound: by the addition theorem
/// `Σ_m |Y_lm|² = (2l+1)/4π`, so `|f| ≤ amplitude · Σ_{l=1}^{L} (2l+1)/√(4π)`.
pub fn random_sup_bound(lmax_pert: usize, amplitude: f64) -> f64 {
    let s: f64 = (1..=lmax_pert).map(|l| (2 * l + 1) as f64).sum();
    amplitude * s / (4.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_gives_zero_field() {
        let g = SphericalGrid::new(16, 32).unwrap();
        let f = synthesize_random(&g, 3, 5, 0.0).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn same_seed_same_field() {
        let g = SphericalGrid::new(16, 32).unwrap();
        let a = synthesize_random(&g, 11, 6, 0.2).unwrap();
        let b = synthesize_random(&g, 11, 6, 0.2).unwrap();
        assert_eq!(a.values(), b.values());
        let c = synthesize_random(&g, 12, 6, 0.2).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn seed_seven_respects_bound_and_has_zero_mean() {
        let g = SphericalGrid::default_grid();
        let f = synthesize_random(&g, 7, 4, 0.1).unwrap();
        let bound = random_sup_bound(4, 0.1);
        assert!((bound - 2.4 / (4.0 * PI).sqrt()).abs() < 1e-15);
        assert!(f.max_abs() <= bound, "{} > {bound}", f.max_abs());
        assert!(f.max_abs() > 0.0);
        assert!(f.integrate().abs() < 1e-14);
    }

    #[test]
    fn rejects_negative_amplitude() {
        let g = SphericalGrid::new(8, 16).unwrap();
        assert!(synthesize_random(&g, 0, 2, -1.0).is_err());
        assert!(synthesize_random(&g, 0, 20, 1.0).is_err());
    }
}
