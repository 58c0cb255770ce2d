//! Adaptive Gauss–Legendre quadrature on intervals.

use std::sync::OnceLock;

use crate::sphere_field::gauss_legendre;

const ORDER: usize = 20;
const MAX_DEPTH: usize = 30;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn fixed(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

/// `∫_a^b f` by recursive bisection of a 20-point Gauss–Legendre rule until
/// the two halves agree with the whole to `tol` (absolute) or to roundoff.
pub(crate) fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, tol0: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (fixed(f, a, m), fixed(f, m, b));
        if depth >= MAX_DEPTH || (l + r - whole).abs() <= tol.max(8.0 * f64::EPSILON * (l.abs() + r.abs())) {
            l + r
        } else {
            let t = (0.5 * tol).max(1e-3 * tol0);
            rec(f, a, m, l, t, tol0, depth + 1) + rec(f, m, b, r, t, tol0, depth + 1)
        }
    }
    if a == b {
        return 0.0;
    }
    rec(f, a, b, fixed(f, a, b), tol, tol, 0)
}
