//! The strictly increasing solution `f` of `f/f' = K h` across a horizon and
//! the double-null metric `F(ρ)(du dv + dv du) + ρ² dΩ²` built from it.

use std::io::Write;

use super::quadrature::integrate;
use super::{ClassSModel, Horizon};
use crate::conformal_geometry::{ConformalFactor, HProfile};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartOptions {
    /// Tabulation nodes on each side of the horizon.
    pub nodes_per_side: usize,
    /// Gap left to a neighbouring horizon, relative to its distance.
    pub margin: f64,
    /// The lightcone is `{v = c}`.
    pub lightcone_constant: f64,
}

impl Default for ChartOptions {
    fn default() -> Self {
        Self { nodes_per_side: 400, margin: 1e-3, lightcone_constant: 1.0 }
    }
}

/// Tabulated chart around the horizon `r_i`, normalized by `f'(r_i) = 1`.
#[derive(Clone, Debug)]
pub struct KruskalChart {
    h: HProfile,
    horizon: Horizon,
    lightcone_constant: f64,
    /// Ascending radii, containing `r_i`.
    r: Vec<f64>,
    /// `g = ln(f/(r − r_i))` at the nodes.
    g: Vec<f64>,
    f: Vec<f64>,
    f_prime: Vec<f64>,
    /// Fritsch–Carlson limited slopes for the monotone spline of `f`.
    spline_slope: Vec<f64>,
}

const QUAD_TOL: f64 = 1e-15;
/// Relative half-width of the interpolated neighbourhood of `r_i`.
const NEAR: f64 = 1e-3;
/// Tabulation stops where `|ln|f||` exceeds this; near a neighbouring horizon
/// `f` behaves like a power of `|r − r_j|` that may overflow.
const LOG_F_MAX: f64 = 300.0;

impl KruskalChart {
    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn k(&self) -> f64 {
        self.horizon.k
    }

    pub fn lightcone_constant(&self) -> f64 {
        self.lightcone_constant
    }

    /// Radii covered by the tabulation.
    pub fn domain(&self) -> (f64, f64) {
        (self.r[0], *self.r.last().expect("nonempty"))
    }

    /// Values of `f` at the ends of the domain.
    pub fn range(&self) -> (f64, f64) {
        (self.f[0], *self.f.last().expect("nonempty"))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    fn g_prime(&self, r: f64) -> f64 {
        g_prime(&self.h, self.horizon, r)
    }

    fn check(&self, r: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfChart { value: r, lo, hi });
        }
        Ok(())
    }

    fn nearest(&self, r: f64) -> usize {
        let i = self.r.partition_point(|&x| x < r).min(self.r.len() - 1);
        if i > 0 && (r - self.r[i - 1]).abs() < (self.r[i] - r).abs() {
            i - 1
        } else {
            i
        }
    }

    fn g_at(&self, r: f64) -> f64 {
        let k = self.nearest(r);
        self.g[k] + integrate(&|x| self.g_prime(x), self.r[k], r, QUAD_TOL)
    }

    /// `f(r) = (r − r_i) e^{g(r)}`.
    pub fn f(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok((r - self.horizon.r) * self.g_at(r).exp())
    }

    /// `f'(r) = e^{g}(r − r_i)/(K h(r))`, equal to 1 at the horizon.
    pub fn f_prime(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.g_at(r).exp() * slope_factor(&self.h, self.horizon, r))
    }

    /// `F(r) = 2K/f'(r)`.
    pub fn big_f(&self, r: f64) -> Result<f64> {
        Ok(2.0 * self.horizon.k / self.f_prime(r)?)
    }

    /// Monotone cubic interpolant of `f` on the tabulation.
    pub fn f_spline(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        let i = self.r.partition_point(|&x| x <= r).clamp(1, self.r.len() - 1) - 1;
        Ok(hermite(self.r[i], self.r[i + 1], self.f[i], self.f[i + 1], self.spline_slope[i], self.spline_slope[i + 1], r))
    }

    /// `ρ = f⁻¹(y)` by bracketed Newton iteration on the exact `f`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(y >= lo && y <= hi) {
            return Err(Error::OutOfChart { value: y, lo, hi });
        }
        let j = self.f.partition_point(|&v| v <= y).clamp(1, self.f.len() - 1) - 1;
        let (mut a, mut b) = (self.r[j], self.r[j + 1]);
        if self.f[j] == y {
            return Ok(a);
        }
        // monotone spline of the inverse as the starting point
        let (sa, sb) = (1.0 / self.f_prime[j], 1.0 / self.f_prime[j + 1]);
        let mut r = hermite(self.f[j], self.f[j + 1], a, b, sa, sb, y).clamp(a, b);
        for _ in 0..100 {
            let fr = self.f(r)? - y;
            if fr == 0.0 {
                return Ok(r);
            }
            if fr > 0.0 {
                b = r;
            } else {
                a = r;
            }
            let mut next = r - fr / self.f_prime(r)?;
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - r).abs() <= 1e-15 * r.abs().max(1.0) || b - a <= 1e-15 * r.abs().max(1.0) {
                return Ok(next);
            }
            r = next;
        }
        Ok(r)
    }

    /// `sup |f/f' − K h|` over the tabulation, with `f'` from an eighth-order
    /// central difference of `f` on the local length scale.
    pub fn ode_residual(&self) -> Result<f64> {
        const C: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        let (lo, hi) = self.domain();
        let ri = self.horizon.r;
        let w = (ri - lo).min(hi - ri);
        let mut worst: f64 = 0.0;
        for &r in &self.r[1..self.r.len() - 1] {
            // ln|f| varies on the length |K h|; near r_i, f is nearly linear
            let scale = if (r - ri).abs() < 0.1 * w { 0.1 * w } else { (self.horizon.k * self.h.eval(r)).abs() };
            let e = (0.05 * scale).min(0.02 * (r - lo).min(hi - r));
            let mut d = 0.0;
            for (k, c) in C.iter().enumerate() {
                let s = (k + 1) as f64 * e;
                d += c * (self.f(r + s)? - self.f(r - s)?);
            }
            d /= e;
            let res = self.f(r)? / d - self.horizon.k * self.h.eval(r);
            worst = worst.max(res.abs());
        }
        Ok(worst)
    }

    /// CSV of `(r, f, f', F)` at `samples` radii spread like the nodes.
    pub fn write_csv<W: Write>(&self, mut out: W, samples: usize) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        writeln!(out, "r,f,f_prime,F").map_err(io)?;
        let n = self.r.len() - 1;
        let samples = samples.max(2);
        for s in 0..samples {
            let x = s as f64 * n as f64 / (samples - 1) as f64;
            let i = (x.floor() as usize).min(n - 1);
            let r = self.r[i] + (x - i as f64) * (self.r[i + 1] - self.r[i]);
            writeln!(out, "{},{},{},{}", r, self.f(r)?, self.f_prime(r)?, self.big_f(r)?).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

fn g_prime(h: &HProfile, hz: Horizon, r: f64) -> f64 {
    let raw = |d: f64| 1.0 / (hz.k * h.eval(hz.r + d)) - 1.0 / d;
    let d = r - hz.r;
    let e = NEAR * hz.r.abs().max(1.0);
    if d.abs() >= e {
        return raw(d);
    }
    // the difference cancels catastrophically near r_i; interpolate the
    // smooth function through well-conditioned samples instead
    let xs = [-2.0 * e, -e, e, 2.0 * e];
    let mut sum = 0.0;
    for (i, &xi) in xs.iter().enumerate() {
        let l: f64 = xs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &xj)| (d - xj) / (xi - xj)).product();
        sum += l * raw(xi);
    }
    sum
}

/// `(r − r_i)/(K h(r))`, the ratio `f'/e^g`.
fn slope_factor(h: &HProfile, hz: Horizon, r: f64) -> f64 {
    let d = r - hz.r;
    if d == 0.0 {
        1.0
    } else {
        d / (hz.k * h.eval(r))
    }
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * h * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * m1
}

/// Fritsch–Carlson limiting of node slopes so the cubic Hermite spline is
/// monotone.
fn monotone_slopes(x: &[f64], y: &[f64], slopes: &[f64]) -> Vec<f64> {
    let mut m = slopes.to_vec();
    for i in 0..x.len() - 1 {
        let delta = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        if delta == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let (a, b) = (m[i] / delta, m[i + 1] / delta);
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * a * delta;
            m[i + 1] = tau * b * delta;
        }
    }
    m
}

/// Builds the chart around horizon `i` of `model`, on the interval between
/// its neighbouring horizons (or the bracket ends).
pub fn solve_f(model: &ClassSModel, i: usize, opts: &ChartOptions) -> Result<KruskalChart> {
    let hz = *model
        .horizons
        .get(i)
        .ok_or_else(|| Error::InvalidParameter(format!("model has {} horizons, asked for #{i}", model.horizons.len())))?;
    if opts.nodes_per_side < 2 || !(opts.margin > 0.0 && opts.margin < 0.5) || !(opts.lightcone_constant > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid chart options {opts:?}")));
    }
    let lo = match i.checked_sub(1).map(|j| model.horizons[j].r) {
        Some(prev) => prev + opts.margin * (hz.r - prev),
        None => model.bracket.0,
    };
    let hi = match model.horizons.get(i + 1).map(|z| z.r) {
        Some(next) => next - opts.margin * (next - hz.r),
        None => model.bracket.1,
    };
    let n = opts.nodes_per_side;
    let side = |extent: f64, sign: f64| -> Vec<f64> {
        let sigma = 0.1 * extent.min(1.0);
        let smax = (extent / sigma).asinh();
        (1..=n).map(|k| hz.r + sign * sigma * (smax * k as f64 / n as f64).sinh()).collect()
    };
    let mut left = side(hz.r - lo, -1.0);
    *left.last_mut().expect("nonempty") = lo;
    let mut right = side(hi - hz.r, 1.0);
    *right.last_mut().expect("nonempty") = hi;

    let h = &model.h;
    let mut r = Vec::with_capacity(2 * n + 1);
    r.extend(left.iter().rev());
    r.push(hz.r);
    r.extend(&right);
    for &x in &r {
        if x != hz.r && (h.eval(x) == 0.0 || slope_factor(h, hz, x) <= 0.0) {
            return Err(Error::InteriorZero(x));
        }
    }

    let mut g = vec![0.0; r.len()];
    let gp = |x: f64| g_prime(h, hz, x);
    for k in (0..n).rev() {
        g[k] = g[k + 1] + integrate(&gp, r[k + 1], r[k], QUAD_TOL);
    }
    for k in n + 1..r.len() {
        g[k] = g[k - 1] + integrate(&gp, r[k - 1], r[k], QUAD_TOL);
    }
    // keep the contiguous stretch around r_i where |ln|f|| stays representable
    let ok = |k: usize| (g[k] + (r[k] - hz.r).abs().ln()).abs() <= LOG_F_MAX || k == n;
    let first = (0..n).rev().take_while(|&k| ok(k)).last().unwrap_or(n);
    let last = (n + 1..r.len()).take_while(|&k| ok(k)).last().unwrap_or(n);
    if first == n || last == n {
        return Err(Error::InvalidParameter("chart collapses to the horizon".into()));
    }
    let r = r[first..=last].to_vec();
    let g = g[first..=last].to_vec();
    let f: Vec<f64> = r.iter().zip(&g).map(|(x, g)| (x - hz.r) * g.exp()).collect();
    let f_prime: Vec<f64> = r.iter().zip(&g).map(|(x, g)| g.exp() * slope_factor(h, hz, *x)).collect();
    if !f.windows(2).all(|w| w[1] > w[0]) || f_prime.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidParameter("tabulated f is not strictly increasing".into()));
    }
    let spline_slope = monotone_slopes(&r, &f, &f_prime);
    Ok(KruskalChart {
        h: h.clone(),
        horizon: hz,
        lightcone_constant: opts.lightcone_constant,
        r,
        g,
        f,
        f_prime,
        spline_slope,
    })
}

/// `(F(ρ), ρ)` at chart point `(u, v)`, with `ρ = f⁻¹(uv)`.
pub fn metric_components(chart: &KruskalChart, u: f64, v: f64) -> Result<(f64, f64)> {
    let rho = chart.inverse(u * v)?;
    Ok((chart.big_f(rho)?, rho))
}

/// Nodewise `(u, v) = (f(ω(x))/c, c)` of the cross section `Σ_ω` of `{v = c}`.
pub fn embed_cross_section(chart: &KruskalChart, omega: &ConformalFactor) -> Result<Vec<(f64, f64)>> {
    let c = chart.lightcone_constant;
    omega.omega().values().iter().map(|&w| Ok((chart.f(w)? / c, c))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal_geometry::LaurentProfile;
    use crate::sphere_field::{ScalarField, SphericalGrid};

    fn de_sitter_chart() -> KruskalChart {
        solve_f(&ClassSModel::de_sitter(5.0).unwrap(), 0, &ChartOptions::default()).unwrap()
    }

    // antiderivative oracle: −2∫dr/(1 − r²) = ln((1 − r)/(1 + r)); f'(1) = 1
    fn oracle(r: f64) -> f64 {
        2.0 * (r - 1.0) / (r + 1.0)
    }

    #[test]
    fn de_sitter_chart_matches_oracle() {
        let chart = de_sitter_chart();
        for &r in chart.nodes() {
            assert!((chart.f(r).unwrap() - oracle(r)).abs() < 1e-12, "{r}");
            let fp = 4.0 / ((r + 1.0) * (r + 1.0));
            assert!((chart.f_prime(r).unwrap() - fp).abs() < 1e-12);
            let big_f = -0.25 * (r + 1.0) * (r + 1.0);
            assert!((chart.big_f(r).unwrap() - big_f).abs() < 1e-12 * big_f.abs(), "{r}: {} vs {big_f}", chart.big_f(r).unwrap());
        }
        assert_eq!(chart.f(1.0).unwrap(), 0.0);
        assert_eq!(chart.f_prime(1.0).unwrap(), 1.0);
        assert!(chart.ode_residual().unwrap() < 1e-9);
        let (lo, hi) = chart.range();
        assert!((lo + 2.0).abs() < 1e-12 && (hi - oracle(5.0)).abs() < 1e-12);
    }

    #[test]
    fn inverse_recovers_radius() {
        let chart = de_sitter_chart();
        for r in [0.0, 1e-3, 0.3, 0.999, 1.0, 1.0001, 2.5, 4.9] {
            let back = chart.inverse(chart.f(r).unwrap()).unwrap();
            assert!((back - r).abs() < 1e-10 * r.max(1.0), "{r}: {back}");
        }
        assert!(matches!(chart.inverse(3.0), Err(Error::OutOfChart { .. })));
    }

    #[test]
    fn spline_is_close_and_monotone() {
        let chart = de_sitter_chart();
        let (lo, hi) = chart.domain();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=2000 {
            let r = lo + (hi - lo) * (k as f64 / 2000.0).powi(3);
            let s = chart.f_spline(r).unwrap();
            assert!(s >= prev);
            assert!((s - oracle(r)).abs() < 1e-6);
            prev = s;
        }
    }

    #[test]
    fn horizon_is_regular_in_kruskal_coordinates() {
        let chart = de_sitter_chart();
        let (f0, rho0) = metric_components(&chart, 0.0, 1.0).unwrap();
        assert_eq!(rho0, 1.0);
        let big_f: Vec<f64> = [-1e-3, -1e-6, 1e-6, 1e-3].iter().map(|y| metric_components(&chart, *y, 1.0).unwrap().0).collect();
        for v in big_f {
            assert!(v.is_finite() && (v - f0).abs() < 2e-3);
        }
    }

    #[test]
    fn reissner_nordstrom_charts() {
        let model = ClassSModel::new(HProfile::Laurent(LaurentProfile::reissner_nordstrom(1.0, 0.5)), (0.05, 10.0)).unwrap();
        assert_eq!(model.horizons.len(), 2);
        for i in 0..2 {
            let chart = solve_f(&model, i, &ChartOptions::default()).unwrap();
            let res = chart.ode_residual().unwrap();
            assert!(res < 1e-9, "chart {i}: {res}");
            assert_eq!(chart.f(chart.horizon().r).unwrap(), 0.0);
            let (lo, hi) = chart.domain();
            if i == 0 {
                assert!(hi < model.horizons[1].r);
            } else {
                assert!(lo > model.horizons[0].r);
            }
        }
    }

    #[test]
    fn embedding_cross_sections() {
        let chart = de_sitter_chart();
        let g = SphericalGrid::new(8, 16).unwrap();
        let at_horizon = embed_cross_section(&chart, &ConformalFactor::constant(&g, 1.0).unwrap()).unwrap();
        assert!(at_horizon.iter().all(|&(u, v)| u == 0.0 && v == 1.0));
        let leaf = embed_cross_section(&chart, &ConformalFactor::constant(&g, 0.5).unwrap()).unwrap();
        assert!(leaf.iter().all(|&(u, _)| (u - oracle(0.5)).abs() < 1e-13));
        // a section straddling the horizon: u changes sign continuously
        let w = ConformalFactor::from_log(ScalarField::from_angles(&g, |t, _| 0.3 * t.cos()));
        let uv = embed_cross_section(&chart, &w).unwrap();
        for ((u, _), wv) in uv.iter().zip(w.omega().values()) {
            assert_eq!(u.signum(), (wv - 1.0).signum());
            assert!((u - oracle(*wv)).abs() < 1e-12);
        }
        let far = ConformalFactor::constant(&g, 6.0).unwrap();
        assert!(matches!(embed_cross_section(&chart, &far), Err(Error::OutOfChart { .. })));
    }

    #[test]
    fn csv_export() {
        let chart = de_sitter_chart();
        let mut buf = Vec::new();
        chart.write_csv(&mut buf, 11).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 12);
        assert!(text.starts_with("r,f,f_prime,F\n"));
    }
}
