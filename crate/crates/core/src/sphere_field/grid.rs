use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::spectral::SpectralField;
use crate::error::{Error, Result};

/// Gauss–Legendre colatitudes crossed with uniform longitudes, together with
/// the tables needed for a scalar spherical-harmonic transform truncated at
/// degree `lmax`.
///
/// Node `(j, k)` sits at colatitude `colatitudes[j]` and longitude
/// `2πk/nlon`; field values are stored row-major with longitude fastest.
pub struct SphericalGrid {
    nlat: usize,
    nlon: usize,
    lmax: usize,
    colatitudes: Vec<f64>,
    cos_colat: Vec<f64>,
    sin_colat: Vec<f64>,
    gauss_weights: Vec<f64>,
    // Normalized associated Legendre values on the northern half of the
    // rings, laid out [m][l - m][ring].
    legendre: Vec<f64>,
    m_offsets: Vec<usize>,
    half: usize,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SphericalGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphericalGrid")
            .field("nlat", &self.nlat)
            .field("nlon", &self.nlon)
            .field("lmax", &self.lmax)
            .finish()
    }
}

pub const DEFAULT_NLAT: usize = 64;
pub const DEFAULT_NLON: usize = 128;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1], nodes
/// in decreasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Orthonormal associated Legendre functions `P̄_l^m(cos θ)` for all
/// `m ≤ l ≤ lmax`, normalized so that `P̄_l^m(cos θ) e^{imφ}` has unit L²
/// norm on the sphere. No Condon–Shortley phase. Output layout matches
/// [`SpectralField`] ordering.
pub(crate) fn normalized_legendre(lmax: usize, x: f64, s: f64, out: &mut [f64]) {
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    let mut idx = 0;
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        out[idx] = pmm;
        if m < lmax {
            let mut p_prev = pmm;
            let mut p = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
            out[idx + 1] = p;
            for l in (m + 2)..=lmax {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
                let next = a * (x * p - b * p_prev);
                p_prev = p;
                p = next;
                out[idx + l - m] = p;
            }
        }
        idx += lmax + 1 - m;
    }
}

impl SphericalGrid {
    /// Builds a grid with the default truncation `lmax = nlat - 1`.
    pub fn new(nlat: usize, nlon: usize) -> Result<Arc<Self>> {
        if nlat == 0 {
            return Err(Error::InvalidGrid("nlat must be positive".into()));
        }
        Self::with_lmax(nlat, nlon, nlat - 1)
    }

    /// The 64 × 128 grid with `lmax = 63`.
    pub fn default_grid() -> Arc<Self> {
        Self::new(DEFAULT_NLAT, DEFAULT_NLON).expect("default grid is valid")
    }

    pub fn with_lmax(nlat: usize, nlon: usize, lmax: usize) -> Result<Arc<Self>> {
        if nlat == 0 {
            return Err(Error::InvalidGrid("nlat must be positive".into()));
        }
        if nlon < 2 * nlat {
            return Err(Error::InvalidGrid(format!("nlon = {nlon} must be at least 2·nlat = {}", 2 * nlat)));
        }
        if lmax + 1 > nlat {
            return Err(Error::InvalidGrid(format!(
                "lmax = {lmax} needs at least {} colatitude nodes, grid has {nlat}",
                lmax + 1
            )));
        }
        let (nodes, gauss_weights) = gauss_legendre(nlat);
        let colatitudes: Vec<f64> = nodes.iter().map(|x| x.acos()).collect();
        let cos_colat = nodes;
        let sin_colat: Vec<f64> = colatitudes.iter().map(|t| t.sin()).collect();

        let half = nlat.div_ceil(2);
        let ncoef = SpectralField::len_for(lmax);
        let mut m_offsets = Vec::with_capacity(lmax + 2);
        let mut off = 0;
        for m in 0..=lmax {
            m_offsets.push(off * half);
            off += lmax + 1 - m;
        }
        m_offsets.push(off * half);

        let mut legendre = vec![0.0; ncoef * half];
        let mut column = vec![0.0; ncoef];
        for j in 0..half {
            normalized_legendre(lmax, cos_colat[j], sin_colat[j], &mut column);
            let mut idx = 0;
            for m in 0..=lmax {
                for l in m..=lmax {
                    legendre[m_offsets[m] + (l - m) * half + j] = column[idx];
                    idx += 1;
                }
            }
        }

        let mut planner = FftPlanner::new();
        let fft_forward = planner.plan_fft_forward(nlon);
        let fft_inverse = planner.plan_fft_inverse(nlon);
        Ok(Arc::new(Self {
            nlat,
            nlon,
            lmax,
            colatitudes,
            cos_colat,
            sin_colat,
            gauss_weights,
            legendre,
            m_offsets,
            half,
            fft_forward,
            fft_inverse,
        }))
    }

    pub fn nlat(&self) -> usize {
        self.nlat
    }

    pub fn nlon(&self) -> usize {
        self.nlon
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn len(&self) -> usize {
        self.nlat * self.nlon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn colatitudes(&self) -> &[f64] {
        &self.colatitudes
    }

    pub fn longitude(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.nlon as f64
    }

    /// Gauss weight of colatitude ring `j`; these sum to 2.
    pub fn gauss_weights(&self) -> &[f64] {
        &self.gauss_weights
    }

    /// Quadrature weight of node `(j, k)`.
    pub fn node_weight(&self, j: usize) -> f64 {
        self.gauss_weights[j] * 2.0 * PI / self.nlon as f64
    }

    /// Per-node quadrature weights in storage order; they sum to 4π.
    pub fn quad_weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.len());
        for j in 0..self.nlat {
            let wj = self.node_weight(j);
            w.extend(std::iter::repeat_n(wj, self.nlon));
        }
        w
    }

    /// Colatitude and longitude of node `idx`.
    pub fn node_angles(&self, idx: usize) -> (f64, f64) {
        let j = idx / self.nlon;
        let k = idx % self.nlon;
        (self.colatitudes[j], self.longitude(k))
    }

    /// Unit vector of node `idx`.
    pub fn node_point(&self, idx: usize) -> [f64; 3] {
        let j = idx / self.nlon;
        let phi = self.longitude(idx % self.nlon);
        let s = self.sin_colat[j];
        [s * phi.cos(), s * phi.sin(), self.cos_colat[j]]
    }

    /// Same shape as `other` (dimensions and truncation).
    pub fn same_shape(&self, other: &SphericalGrid) -> bool {
        self.nlat == other.nlat && self.nlon == other.nlon && self.lmax == other.lmax
    }

    pub fn describe(&self) -> String {
        format!("{}x{} (lmax {})", self.nlat, self.nlon, self.lmax)
    }

    /// Quadrature sum of nodal values.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        let mut total = 0.0;
        for j in 0..self.nlat {
            let row: f64 = values[j * self.nlon..(j + 1) * self.nlon].iter().sum();
            total += self.gauss_weights[j] * row;
        }
        total * 2.0 * PI / self.nlon as f64
    }

    /// Spherical-harmonic analysis truncated at `lmax`.
    pub fn analyze(&self, values: &[f64]) -> SpectralField {
        self.analyze_to(values, self.lmax)
    }

    /// Analysis truncated at `lmax_out ≤ self.lmax`.
    pub fn analyze_to(&self, values: &[f64], lmax_out: usize) -> SpectralField {
        assert_eq!(values.len(), self.len(), "analyze: wrong number of nodal values");
        assert!(lmax_out <= self.lmax, "analyze: truncation above grid lmax");
        let (nlat, nlon, half) = (self.nlat, self.nlon, self.half);
        let mmax = lmax_out;

        // Ring Fourier coefficients G[j][m], m ≤ mmax.
        let scale = 2.0 * PI / nlon as f64;
        let mut ring = vec![Complex64::new(0.0, 0.0); nlon];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft_forward.get_inplace_scratch_len()];
        let mut fourier = vec![Complex64::new(0.0, 0.0); nlat * (mmax + 1)];
        for j in 0..nlat {
            for (c, &v) in ring.iter_mut().zip(&values[j * nlon..(j + 1) * nlon]) {
                *c = Complex64::new(v, 0.0);
            }
            self.fft_forward.process_with_scratch(&mut ring, &mut scratch);
            for m in 0..=mmax {
                fourier[j * (mmax + 1) + m] = ring[m] * scale;
            }
        }

        // Symmetric / antisymmetric combinations, weighted, laid out [m][ring].
        let mut sym = vec![Complex64::new(0.0, 0.0); (mmax + 1) * half];
        let mut anti = vec![Complex64::new(0.0, 0.0); (mmax + 1) * half];
        for j in 0..half {
            let jm = nlat - 1 - j;
            let w = self.gauss_weights[j];
            for m in 0..=mmax {
                let a = fourier[j * (mmax + 1) + m];
                if jm == j {
                    sym[m * half + j] = a * w;
                    anti[m * half + j] = a * w;
                } else {
                    let b = fourier[jm * (mmax + 1) + m];
                    sym[m * half + j] = (a + b) * w;
                    anti[m * half + j] = (a - b) * w;
                }
            }
        }

        let mut out = SpectralField::zeros(lmax_out);
        for m in 0..=mmax {
            let s = &sym[m * half..(m + 1) * half];
            let a = &anti[m * half..(m + 1) * half];
            for l in m..=lmax_out {
                let p = &self.legendre[self.m_offsets[m] + (l - m) * half..][..half];
                let src = if (l + m) % 2 == 0 { s } else { a };
                let mut acc = Complex64::new(0.0, 0.0);
                for (pj, sj) in p.iter().zip(src) {
                    acc += sj * *pj;
                }
                *out.get_mut(l, m) = acc;
            }
        }
        out
    }

    /// Spherical-harmonic synthesis onto the nodes of this grid. Degrees
    /// above the grid's `lmax` are dropped.
    pub fn synthesize(&self, field: &SpectralField) -> Vec<f64> {
        let (nlat, nlon, half) = (self.nlat, self.nlon, self.half);
        let lmax = field.lmax().min(self.lmax);
        let mut fourier = vec![Complex64::new(0.0, 0.0); nlat * (lmax + 1)];
        let mut even = vec![Complex64::new(0.0, 0.0); half];
        let mut odd = vec![Complex64::new(0.0, 0.0); half];
        for m in 0..=lmax {
            even.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            odd.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            for l in m..=lmax {
                let coef = field.get(l, m);
                if coef == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let p = &self.legendre[self.m_offsets[m] + (l - m) * half..][..half];
                let dst = if (l + m) % 2 == 0 { &mut even } else { &mut odd };
                for (d, pj) in dst.iter_mut().zip(p) {
                    *d += coef * *pj;
                }
            }
            for j in 0..half {
                let jm = nlat - 1 - j;
                fourier[j * (lmax + 1) + m] = even[j] + odd[j];
                if jm != j {
                    fourier[jm * (lmax + 1) + m] = even[j] - odd[j];
                }
            }
        }

        let mut values = vec![0.0; nlat * nlon];
        let mut ring = vec![Complex64::new(0.0, 0.0); nlon];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft_inverse.get_inplace_scratch_len()];
        for j in 0..nlat {
            ring.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            let g = &fourier[j * (lmax + 1)..(j + 1) * (lmax + 1)];
            ring[0] = Complex64::new(g[0].re, 0.0);
            for m in 1..=lmax {
                ring[m] = g[m];
                ring[nlon - m] = g[m].conj();
            }
            self.fft_inverse.process_with_scratch(&mut ring, &mut scratch);
            for (v, c) in values[j * nlon..(j + 1) * nlon].iter_mut().zip(&ring) {
                *v = c.re;
            }
        }
        values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 17, 64, 96] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}: {s}");
            assert!(x.windows(2).all(|p| p[0] > p[1]));
        }
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        let n = 8;
        let (x, w) = gauss_legendre(n);
        for k in 0..(2 * n) {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn node_weights_sum_to_four_pi() {
        let g = SphericalGrid::new(64, 128).unwrap();
        let s: f64 = g.quad_weights().iter().sum();
        assert!((s - 4.0 * PI).abs() / (4.0 * PI) < 1e-12);
    }

    #[test]
    fn rejects_coarse_grids() {
        assert!(matches!(SphericalGrid::new(0, 8), Err(Error::InvalidGrid(_))));
        assert!(matches!(SphericalGrid::new(16, 20), Err(Error::InvalidGrid(_))));
        assert!(matches!(SphericalGrid::with_lmax(16, 32, 16), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn odd_nlat_roundtrip() {
        let g = SphericalGrid::new(9, 18).unwrap();
        let mut c = SpectralField::zeros(g.lmax());
        *c.get_mut(3, 1) = Complex64::new(0.2, -0.4);
        *c.get_mut(8, 8) = Complex64::new(0.1, 0.3);
        *c.get_mut(4, 0) = Complex64::new(0.7, 0.0);
        let v = g.synthesize(&c);
        let back = g.analyze(&v);
        for (a, b) in c.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
