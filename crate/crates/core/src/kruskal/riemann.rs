//! Finite-difference curvature of four-dimensional metrics, used to check
//! the double-null chart against known curvature.

use super::chart::{metric_components, KruskalChart};
use crate::error::{Error, Result};

/// Metric components in some coordinates `x = (x⁰, …, x³)`.
pub type Metric4 = [[f64; 4]; 4];

type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];

/// `F(ρ)(du dv + dv du) + ρ² dΩ²` at `x = (u, v, θ, φ)`.
pub fn kruskal_metric(chart: &KruskalChart, x: [f64; 4]) -> Result<Metric4> {
    let (f, rho) = metric_components(chart, x[0], x[1])?;
    let mut g = [[0.0; 4]; 4];
    g[0][1] = f;
    g[1][0] = f;
    g[2][2] = rho * rho;
    g[3][3] = rho * rho * x[2].sin().powi(2);
    Ok(g)
}

fn invert(g: &Metric4) -> Result<Metric4> {
    let mut a = *g;
    let mut inv: Metric4 = std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }));
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).expect("nonempty");
        if a[p][c] == 0.0 {
            return Err(Error::InvalidParameter("degenerate metric".into()));
        }
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for k in 0..4 {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for r in 0..4 {
            if r != c {
                let m = a[r][c];
                for k in 0..4 {
                    a[r][k] -= m * a[c][k];
                    inv[r][k] -= m * inv[c][k];
                }
            }
        }
    }
    Ok(inv)
}

/// Fourth-order central difference of a vector-valued map along axis `e`.
fn derivative<const N: usize>(f: &impl Fn([f64; 4]) -> Result<[f64; N]>, x: [f64; 4], e: usize, h: f64) -> Result<[f64; N]> {
    let at = |s: f64| {
        let mut y = x;
        y[e] += s * h;
        f(y)
    };
    let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
    Ok(std::array::from_fn(|i| (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h)))
}

fn flatten(g: &Metric4) -> [f64; 16] {
    std::array::from_fn(|i| g[i / 4][i % 4])
}

/// `Γ^a_{bc}`, flattened as `16a + 4b + c`.
fn christoffel(metric: &impl Fn([f64; 4]) -> Result<Metric4>, x: [f64; 4], h: f64) -> Result<[f64; 64]> {
    let g = metric(x)?;
    let ginv = invert(&g)?;
    let flat = |y: [f64; 4]| metric(y).map(|g| flatten(&g));
    let mut dg = [[0.0; 16]; 4];
    for (e, d) in dg.iter_mut().enumerate() {
        *d = derivative(&flat, x, e, h)?;
    }
    let dg = |e: usize, i: usize, j: usize| dg[e][4 * i + j];
    Ok(std::array::from_fn(|n| {
        let (a, b, c) = (n / 16, (n / 4) % 4, n % 4);
        0.5 * (0..4).map(|d| ginv[a][d] * (dg(b, d, c) + dg(c, d, b) - dg(d, b, c))).sum::<f64>()
    }))
}

/// Fully covariant `R_abcd = g_ae R^e_bcd` with
/// `R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb`,
/// from nested fourth-order central differences with step `h`.
pub fn riemann_tensor(metric: &impl Fn([f64; 4]) -> Result<Metric4>, x: [f64; 4], h: f64) -> Result<Tensor4> {
    let gam = christoffel(metric, x, h)?;
    let g = metric(x)?;
    let chr = |y: [f64; 4]| christoffel(metric, y, h);
    let mut dgam = [[0.0; 64]; 4];
    for (e, d) in dgam.iter_mut().enumerate() {
        *d = derivative(&chr, x, e, h)?;
    }
    let gm = |a: usize, b: usize, c: usize| gam[16 * a + 4 * b + c];
    let up: Tensor4 = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| {
                std::array::from_fn(|d| {
                    let mut r = dgam[c][16 * a + 4 * d + b] - dgam[d][16 * a + 4 * c + b];
                    for e in 0..4 {
                        r += gm(a, c, e) * gm(e, d, b) - gm(a, d, e) * gm(e, c, b);
                    }
                    r
                })
            })
        })
    });
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| std::array::from_fn(|d| (0..4).map(|e| g[a][e] * up[e][b][c][d]).sum()))
        })
    }))
}

/// `max |R_abcd − k(g_ac g_bd − g_ad g_bc)|` at `x`.
pub fn constant_curvature_defect(metric: &impl Fn([f64; 4]) -> Result<Metric4>, x: [f64; 4], h: f64, k: f64) -> Result<f64> {
    let r = riemann_tensor(metric, x, h)?;
    let g = metric(x)?;
    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let want = k * (g[a][c] * g[b][d] - g[a][d] * g[b][c]);
                    worst = worst.max((r[a][b][c][d] - want).abs());
                }
            }
        }
    }
    Ok(worst)
}
