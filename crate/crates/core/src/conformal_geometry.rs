//! Geometry of conformally round cross sections `Σ_ω` of a shear-free
//! lightcone: scalar curvature, area, spacetime mean curvature `𝓗²`, null
//! expansions and the causal character of the mean curvature vector.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere_field::{FieldRange, ScalarField, SphericalGrid};

/// A cross section `Σ_ω`, stored through `u = ln ω` so that `ω > 0`.
#[derive(Clone, Debug)]
pub struct ConformalFactor {
    log_omega: ScalarField,
}

impl ConformalFactor {
    pub fn from_log(log_omega: ScalarField) -> Self {
        Self { log_omega }
    }

    /// Builds `ln ω` from nodal values of `ω`, all of which must be positive.
    pub fn from_omega(omega: &ScalarField) -> Result<Self> {
        if let Some(i) = omega.values().iter().position(|&w| !(w > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "conformal factor must be positive, got {} at node {i}",
                omega.values()[i]
            )));
        }
        Ok(Self { log_omega: omega.map(f64::ln) })
    }

    pub fn constant(grid: &Arc<SphericalGrid>, b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidParameter(format!("constant factor must be positive, got {b}")));
        }
        Ok(Self { log_omega: ScalarField::constant(grid, b.ln()) })
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        self.log_omega.grid()
    }

    pub fn log_omega(&self) -> &ScalarField {
        &self.log_omega
    }

    pub fn omega(&self) -> ScalarField {
        self.log_omega.map(f64::exp)
    }

    /// `ω²`, the area density of `γ_ω` against `dΩ`.
    pub fn omega_squared(&self) -> ScalarField {
        self.log_omega.map(|u| (2.0 * u).exp())
    }

    /// `λ·ω` for a constant `λ > 0`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let s = lambda.ln();
        Self { log_omega: self.log_omega.map(|u| u + s) }
    }

    /// Rescales so that the area is exactly `target`.
    pub fn with_area(&self, target: f64) -> Result<Self> {
        if !(target > 0.0) {
            return Err(Error::InvalidParameter(format!("target area must be positive, got {target}")));
        }
        Ok(self.scaled((target / area(self)).sqrt()))
    }
}

/// `h(r) = Σ c_k r^{p_k}`: covers de Sitter, anti-de Sitter, Schwarzschild
/// and Reissner–Nordström type profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentProfile {
    pub terms: Vec<(i32, f64)>,
}

impl LaurentProfile {
    pub fn new(terms: Vec<(i32, f64)>) -> Self {
        Self { terms }
    }

    /// `1 - 2M/r + Q²/r²`.
    pub fn reissner_nordstrom(mass: f64, charge: f64) -> Self {
        Self::new(vec![(0, 1.0), (-1, -2.0 * mass), (-2, charge * charge)])
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.terms.iter().map(|&(p, c)| c * r.powi(p)).sum()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.terms.iter().filter(|(p, _)| *p != 0).map(|&(p, c)| c * p as f64 * r.powi(p - 1)).sum()
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .filter(|(p, _)| *p != 0 && *p != 1)
            .map(|&(p, c)| c * (p * (p - 1)) as f64 * r.powi(p - 2))
            .sum()
    }
}

/// Static profile function `h` of a class-S metric
/// `-h dt² + h⁻¹ dr² + r² dΩ²`.
#[derive(Clone)]
pub enum HProfile {
    Laurent(LaurentProfile),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for HProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HProfile::Laurent(p) => f.debug_tuple("Laurent").field(&p.terms).finish(),
            HProfile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl HProfile {
    pub fn custom(h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        HProfile::Custom(Arc::new(h))
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            HProfile::Laurent(p) => p.eval(r),
            HProfile::Custom(h) => h(r),
        }
    }

    /// `h'(r)`; exact for Laurent profiles, fourth-order differences otherwise.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            HProfile::Laurent(p) => p.derivative(r),
            HProfile::Custom(h) => {
                let e = 1e-3 * r.abs().max(1e-2);
                (8.0 * (h(r + e) - h(r - e)) - (h(r + 2.0 * e) - h(r - 2.0 * e))) / (12.0 * e)
            }
        }
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        match self {
            HProfile::Laurent(p) => p.second_derivative(r),
            HProfile::Custom(h) => {
                let e = 1e-3 * r.abs().max(1e-2);
                (h(r + e) - 2.0 * h(r) + h(r - e)) / (e * e)
            }
        }
    }
}

/// Which lightcone the cross sections live in; fixes the Gauss equation
/// relating `𝓗²` to the intrinsic curvature.
#[derive(Clone, Debug)]
pub enum LightconeModel {
    Minkowski,
    DeSitter,
    AntiDeSitter,
    /// General class-S profile; `bracket` is the open interval of radii on
    /// which the cone is valid (between the neighbouring horizons of the
    /// chart in use).
    ClassS { h: HProfile, bracket: (f64, f64) },
}

impl fmt::Display for LightconeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl LightconeModel {
    pub fn name(&self) -> &'static str {
        match self {
            LightconeModel::Minkowski => "minkowski",
            LightconeModel::DeSitter => "de-sitter",
            LightconeModel::AntiDeSitter => "anti-de-sitter",
            LightconeModel::ClassS { .. } => "class-s",
        }
    }

    /// The profile `h(r)` of the model.
    pub fn h(&self, r: f64) -> f64 {
        match self {
            LightconeModel::Minkowski => 1.0,
            LightconeModel::DeSitter => 1.0 - r * r,
            LightconeModel::AntiDeSitter => 1.0 + r * r,
            LightconeModel::ClassS { h, .. } => h.eval(r),
        }
    }

    /// Checks that every value of `ω` lies inside the model's bracket.
    pub fn check_range(&self, omega_min: f64, omega_max: f64) -> Result<()> {
        if let LightconeModel::ClassS { bracket: (lo, hi), .. } = self {
            if omega_min <= *lo {
                return Err(Error::OutsideBracket { lo: *lo, hi: *hi, value: omega_min });
            }
            if omega_max >= *hi {
                return Err(Error::OutsideBracket { lo: *lo, hi: *hi, value: omega_max });
            }
        }
        Ok(())
    }

    /// Horizon radius and surface-gravity constant `K = 1/h'(r_i)` when the
    /// model has a single cosmological horizon in closed form.
    pub fn horizon(&self) -> Option<(f64, f64)> {
        match self {
            LightconeModel::DeSitter => Some((1.0, -0.5)),
            _ => None,
        }
    }
}

/// Causal character of the mean curvature vector along a cross section.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalClass {
    OuterUntrapped,
    MotsCandidate,
    Trapped,
    Mixed,
}

pub const DEFAULT_MOTS_TOL: f64 = 1e-6;

/// Everything the geometry module knows about one cross section.
#[derive(Clone, Debug)]
pub struct CrossSectionReport {
    pub area: f64,
    pub scalar_curvature: ScalarField,
    pub h2: ScalarField,
    pub theta: ScalarField,
    pub theta_bar: ScalarField,
    pub gauss_bonnet_defect: f64,
    pub causal_class: CausalClass,
}

/// JSON-facing summary of a [`CrossSectionReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionSummary {
    pub model: String,
    pub area: f64,
    pub area_radius: f64,
    pub scalar_curvature: FieldRange,
    pub h2: FieldRange,
    pub gauss_bonnet_defect: f64,
    pub causal_class: CausalClass,
}

impl CrossSectionReport {
    pub fn summary(&self, model: &LightconeModel) -> CrossSectionSummary {
        CrossSectionSummary {
            model: model.name().to_string(),
            area: self.area,
            area_radius: (self.area / (4.0 * PI)).sqrt(),
            scalar_curvature: self.scalar_curvature.range(),
            h2: self.h2.range(),
            gauss_bonnet_defect: self.gauss_bonnet_defect,
            causal_class: self.causal_class,
        }
    }
}

/// Scalar curvature of `γ_ω = ω² dΩ²`: `R = (2 − 2Δ ln ω)/ω²`.
pub fn scalar_curvature(omega: &ConformalFactor) -> ScalarField {
    let u = omega.log_omega();
    let lap = u.laplacian();
    lap.zip_with(u, |d, u| (2.0 - 2.0 * d) * (-2.0 * u).exp()).expect("same grid")
}

/// `|Σ_ω| = ∫ ω² dΩ`.
pub fn area(omega: &ConformalFactor) -> f64 {
    omega.omega_squared().integrate()
}

/// `𝓗²` from the Gauss equation of the model, nodewise.
pub fn spacetime_mean_curvature(omega: &ConformalFactor, model: &LightconeModel) -> Result<ScalarField> {
    let r = scalar_curvature(omega);
    mean_curvature_from_curvature(omega, &r, model)
}

pub(crate) fn mean_curvature_from_curvature(
    omega: &ConformalFactor,
    r: &ScalarField,
    model: &LightconeModel,
) -> Result<ScalarField> {
    match model {
        LightconeModel::Minkowski => Ok(r.map(|r| 2.0 * r)),
        LightconeModel::DeSitter => Ok(r.map(|r| 2.0 * r - 4.0)),
        LightconeModel::AntiDeSitter => Ok(r.map(|r| 2.0 * r + 4.0)),
        LightconeModel::ClassS { h, .. } => {
            let w = omega.omega();
            model.check_range(w.min(), w.max())?;
            r.zip_with(&w, |r, w| 2.0 * r - 4.0 / (w * w) * (1.0 - h.eval(w)))
        }
    }
}

/// Null expansions `(θ̲, θ)` with `θ̲ = 2/ω` and `θ = 𝓗²/θ̲`.
pub fn null_expansions(omega: &ConformalFactor, model: &LightconeModel) -> Result<(ScalarField, ScalarField)> {
    let h2 = spacetime_mean_curvature(omega, model)?;
    Ok(expansions_from_h2(omega, &h2))
}

fn expansions_from_h2(omega: &ConformalFactor, h2: &ScalarField) -> (ScalarField, ScalarField) {
    let u = omega.log_omega();
    let theta_bar = u.map(|u| 2.0 * (-u).exp());
    let theta = h2.zip_with(u, |h, u| 0.5 * u.exp() * h).expect("same grid");
    (theta_bar, theta)
}

/// `∫ R dμ − 8π` with `dμ = ω² dΩ`.
pub fn gauss_bonnet_defect(omega: &ConformalFactor) -> f64 {
    let r = scalar_curvature(omega);
    r.zip_with(&omega.omega_squared(), |r, w2| r * w2).expect("same grid").integrate() - 8.0 * PI
}

/// Sign trichotomy of `𝓗²` with tolerance `tol`.
pub fn classify_causal(h2: &ScalarField, tol: f64) -> Result<CausalClass> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    Ok(if h2.max_abs() <= tol {
        CausalClass::MotsCandidate
    } else if h2.max() < -tol {
        CausalClass::Trapped
    } else if h2.min() > tol {
        CausalClass::OuterUntrapped
    } else {
        CausalClass::Mixed
    })
}

/// Full report for one cross section.
pub fn analyze_cross_section(omega: &ConformalFactor, model: &LightconeModel, tol: f64) -> Result<CrossSectionReport> {
    let r = scalar_curvature(omega);
    let h2 = mean_curvature_from_curvature(omega, &r, model)?;
    let (theta_bar, theta) = expansions_from_h2(omega, &h2);
    let w2 = omega.omega_squared();
    let area = w2.integrate();
    let gb = r.zip_with(&w2, |r, w| r * w)?.integrate() - 8.0 * PI;
    let causal_class = classify_causal(&h2, tol)?;
    Ok(CrossSectionReport {
        area,
        scalar_curvature: r,
        h2,
        theta,
        theta_bar,
        gauss_bonnet_defect: gb,
        causal_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_field::synthesize_random;

    fn grid() -> Arc<SphericalGrid> {
        SphericalGrid::default_grid()
    }

    // Möbius factor b/(√(1+|a|²) − a·x), written out independently here.
    fn mobius_factor(g: &Arc<SphericalGrid>, b: f64, a: [f64; 3]) -> ConformalFactor {
        let na = (1.0 + a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        ConformalFactor::from_log(ScalarField::from_points(g, |x| {
            (b / (na - a[0] * x[0] - a[1] * x[1] - a[2] * x[2])).ln()
        }))
    }

    #[test]
    fn round_spheres_have_curvature_two_over_b_squared() {
        for b in [0.5, 1.0, 3.0] {
            let w = ConformalFactor::constant(&grid(), b).unwrap();
            let r = scalar_curvature(&w);
            assert!((r.max() - 2.0 / (b * b)).abs() < 1e-12);
            assert!((r.min() - 2.0 / (b * b)).abs() < 1e-12);
        }
    }

    #[test]
    fn mobius_factor_has_constant_curvature() {
        let w = mobius_factor(&grid(), 2.0, [0.3, 0.0, 0.0]);
        let r = scalar_curvature(&w);
        assert!((r.max() - 0.5).abs() < 1e-9 && (r.min() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn areas() {
        let g = grid();
        let w = ConformalFactor::constant(&g, 3.0).unwrap();
        assert!((area(&w) - 36.0 * PI).abs() < 1e-11);
        assert!((area(&ConformalFactor::constant(&g, 1.0).unwrap()) - 4.0 * PI).abs() < 1e-12);
        let w = mobius_factor(&g, 1.5, [0.4, -0.7, 1.1]);
        assert!((area(&w) - 9.0 * PI).abs() / (9.0 * PI) < 1e-9);
    }

    #[test]
    fn de_sitter_mean_curvature_of_round_spheres() {
        let g = grid();
        let h2 = spacetime_mean_curvature(&ConformalFactor::constant(&g, 1.0).unwrap(), &LightconeModel::DeSitter).unwrap();
        assert!(h2.max_abs() < 1e-12);
        let h2 = spacetime_mean_curvature(&ConformalFactor::constant(&g, 2.0).unwrap(), &LightconeModel::DeSitter).unwrap();
        assert!((h2.max() + 3.0).abs() < 1e-12 && (h2.min() + 3.0).abs() < 1e-12);
        assert_eq!(classify_causal(&h2, DEFAULT_MOTS_TOL).unwrap(), CausalClass::Trapped);
    }

    #[test]
    fn class_s_with_de_sitter_profile_matches_de_sitter() {
        let g = grid();
        let w = ConformalFactor::from_log(synthesize_random(&g, 5, 6, 0.1).unwrap());
        let ds = spacetime_mean_curvature(&w, &LightconeModel::DeSitter).unwrap();
        let model = LightconeModel::ClassS {
            h: HProfile::Laurent(LaurentProfile::new(vec![(0, 1.0), (2, -1.0)])),
            bracket: (0.0, f64::INFINITY),
        };
        let cs = spacetime_mean_curvature(&w, &model).unwrap();
        for (a, b) in ds.values().iter().zip(cs.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn class_s_bracket_violation() {
        let g = grid();
        let w = ConformalFactor::constant(&g, 2.0).unwrap();
        let model = LightconeModel::ClassS { h: HProfile::custom(|r| 1.0 - r), bracket: (0.0, 1.5) };
        assert!(matches!(spacetime_mean_curvature(&w, &model), Err(Error::OutsideBracket { .. })));
    }

    #[test]
    fn expansions_of_round_spheres() {
        let g = grid();
        let (tb, t) = null_expansions(&ConformalFactor::constant(&g, 1.0).unwrap(), &LightconeModel::DeSitter).unwrap();
        assert!((tb.min() - 2.0).abs() < 1e-14 && (tb.max() - 2.0).abs() < 1e-14);
        assert!(t.max_abs() < 1e-12);
        let b = 1.7;
        let w = ConformalFactor::constant(&g, b).unwrap();
        let (tb, t) = null_expansions(&w, &LightconeModel::DeSitter).unwrap();
        assert!((tb.max() - 2.0 / b).abs() < 1e-12);
        assert!((t.max() - (2.0 / b - 2.0 * b)).abs() < 1e-12);
        let (tb, t) = null_expansions(&w, &LightconeModel::Minkowski).unwrap();
        assert!((tb.max() - 2.0 / b).abs() < 1e-12 && (t.max() - 2.0 / b).abs() < 1e-12);
    }

    #[test]
    fn h2_is_product_of_expansions_for_all_models() {
        let g = grid();
        let w = ConformalFactor::from_log(synthesize_random(&g, 9, 5, 0.2).unwrap());
        let models = [
            LightconeModel::Minkowski,
            LightconeModel::DeSitter,
            LightconeModel::AntiDeSitter,
            LightconeModel::ClassS {
                h: HProfile::Laurent(LaurentProfile::reissner_nordstrom(0.1, 0.05)),
                bracket: (0.2, 10.0),
            },
        ];
        for model in &models {
            let rep = analyze_cross_section(&w, model, DEFAULT_MOTS_TOL).unwrap();
            let prod = rep.theta_bar.zip_with(&rep.theta, |a, b| a * b).unwrap();
            for (p, h) in prod.values().iter().zip(rep.h2.values()) {
                assert!((p - h).abs() <= 1e-12 * h.abs().max(1.0), "{model}");
            }
        }
    }

    #[test]
    fn gauss_bonnet_for_random_factors() {
        let g = grid();
        assert!(gauss_bonnet_defect(&ConformalFactor::constant(&g, 1.0).unwrap()).abs() < 1e-12);
        for seed in 0..4 {
            let w = ConformalFactor::from_log(synthesize_random(&g, seed, 8, 0.3 / 8.0).unwrap());
            assert!(gauss_bonnet_defect(&w).abs() < 1e-8);
        }
        let w = mobius_factor(&g, 0.7, [0.0, 1.2, -0.5]);
        assert!(gauss_bonnet_defect(&w).abs() < 1e-8);
    }

    #[test]
    fn classify() {
        let g = SphericalGrid::new(4, 8).unwrap();
        assert_eq!(classify_causal(&ScalarField::constant(&g, -3.0), 1e-6).unwrap(), CausalClass::Trapped);
        assert_eq!(classify_causal(&ScalarField::constant(&g, 0.0), 1e-6).unwrap(), CausalClass::MotsCandidate);
        assert_eq!(classify_causal(&ScalarField::constant(&g, 0.5), 1e-6).unwrap(), CausalClass::OuterUntrapped);
        let mixed = ScalarField::from_angles(&g, |t, _| t.cos());
        assert_eq!(classify_causal(&mixed, 1e-6).unwrap(), CausalClass::Mixed);
        assert!(classify_causal(&mixed, 0.0).is_err());
    }

    #[test]
    fn with_area_rescales_exactly() {
        let g = grid();
        let w = ConformalFactor::from_log(synthesize_random(&g, 2, 4, 0.1).unwrap()).with_area(4.0 * PI).unwrap();
        assert!((area(&w) - 4.0 * PI).abs() < 1e-13);
    }
}
