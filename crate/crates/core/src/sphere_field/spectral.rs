use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::normalized_legendre;

/// Spherical-harmonic coefficients `a_lm`, `0 ≤ m ≤ l ≤ lmax`, of a real
/// field `f = Σ_l [a_l0 Y_l0 + 2 Re Σ_{m>0} a_lm Y_lm]` with orthonormal
/// `Y_lm`. Stored m-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    lmax: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn len_for(lmax: usize) -> usize {
        (lmax + 1) * (lmax + 2) / 2
    }

    pub fn zeros(lmax: usize) -> Self {
        Self { lmax, coeffs: vec![Complex64::new(0.0, 0.0); Self::len_for(lmax)] }
    }

    /// Coefficients of the constant field `c`.
    pub fn constant(lmax: usize, c: f64) -> Self {
        let mut out = Self::zeros(lmax);
        out.coeffs[0] = Complex64::new(c * (4.0 * PI).sqrt(), 0.0);
        out
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    #[inline]
    fn index(&self, l: usize, m: usize) -> usize {
        debug_assert!(m <= l && l <= self.lmax);
        m * (self.lmax + 1) - m * (m.saturating_sub(1)) / 2 + (l - m)
    }

    pub fn get(&self, l: usize, m: usize) -> Complex64 {
        self.coeffs[self.index(l, m)]
    }

    pub fn get_mut(&mut self, l: usize, m: usize) -> &mut Complex64 {
        let i = self.index(l, m);
        &mut self.coeffs[i]
    }

    /// Mean value of the field over the sphere.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re / (4.0 * PI).sqrt()
    }

    /// Integral of the field over the unit sphere.
    pub fn integral(&self) -> f64 {
        self.coeffs[0].re * (4.0 * PI).sqrt()
    }

    /// Iterates `(l, m, a_lm)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let lmax = self.lmax;
        (0..=lmax).flat_map(move |m| (m..=lmax).map(move |l| (l, m))).zip(self.coeffs.iter()).map(|((l, m), c)| (l, m, *c))
    }

    /// Applies the multiplier `g(l)` degree by degree.
    pub fn scale_by_degree(&mut self, g: impl Fn(usize) -> f64) {
        let lmax = self.lmax;
        let mut i = 0;
        for m in 0..=lmax {
            for l in m..=lmax {
                self.coeffs[i] *= g(l);
                i += 1;
            }
        }
    }

    /// Spherical Laplacian: multiplies degree `l` by `-l(l+1)`.
    pub fn laplacian(&self) -> Self {
        let mut out = self.clone();
        out.scale_by_degree(|l| -((l * (l + 1)) as f64));
        out
    }

    /// `self + k·other`, both at the same truncation.
    pub fn axpy(&mut self, k: f64, other: &SpectralField) {
        assert_eq!(self.lmax, other.lmax);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * k;
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= k);
        out
    }

    /// Re-truncates (or zero-pads) to a new `lmax`.
    pub fn resized(&self, lmax: usize) -> Self {
        let mut out = Self::zeros(lmax);
        let top = lmax.min(self.lmax);
        for m in 0..=top {
            for l in m..=top {
                *out.get_mut(l, m) = self.get(l, m);
            }
        }
        out
    }

    /// Sum of squared coefficients, i.e. the L² norm squared of the field.
    pub fn norm_sqr(&self) -> f64 {
        self.iter().map(|(_, m, c)| if m == 0 { c.re * c.re } else { 2.0 * c.norm_sqr() }).sum()
    }

    /// Evaluates the expansion at colatitude `theta`, longitude `phi`.
    pub fn evaluate(&self, theta: f64, phi: f64) -> f64 {
        let mut p = vec![0.0; self.coeffs.len()];
        self.evaluate_with(theta, phi, &mut p)
    }

    /// As [`evaluate`](Self::evaluate) with a caller-provided Legendre buffer.
    pub fn evaluate_with(&self, theta: f64, phi: f64, buffer: &mut [f64]) -> f64 {
        self.evaluate_cs(theta.cos(), theta.sin(), phi, buffer)
    }

    fn evaluate_cs(&self, cos_theta: f64, sin_theta: f64, phi: f64, buffer: &mut [f64]) -> f64 {
        normalized_legendre(self.lmax, cos_theta, sin_theta, buffer);
        let mut total = 0.0;
        let mut i = 0;
        for m in 0..=self.lmax {
            let mut acc = Complex64::new(0.0, 0.0);
            for _l in m..=self.lmax {
                acc += self.coeffs[i] * buffer[i];
                i += 1;
            }
            if m == 0 {
                total += acc.re;
            } else {
                let e = Complex64::from_polar(1.0, m as f64 * phi);
                total += 2.0 * (acc * e).re;
            }
        }
        total
    }

    /// Evaluates at a unit vector.
    pub fn evaluate_at_point(&self, x: [f64; 3], buffer: &mut [f64]) -> f64 {
        let s = x[0].hypot(x[1]);
        let phi = x[1].atan2(x[0]);
        self.evaluate_cs(x[2], s, phi, buffer)
    }
}
