use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::SphericalGrid;
use super::spectral::SpectralField;
use crate::error::{Error, Result};

/// A real function sampled at the nodes of a [`SphericalGrid`].
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<SphericalGrid>,
    values: Vec<f64>,
}

/// Scalar summary of a field, as written into JSON reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRange {
    pub min: f64,
    pub max: f64,
}

impl ScalarField {
    pub fn new(grid: Arc<SphericalGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: &Arc<SphericalGrid>, c: f64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// Samples `f(θ, φ)` at every node.
    pub fn from_angles(grid: &Arc<SphericalGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let (t, p) = grid.node_angles(i);
                f(t, p)
            })
            .collect();
        Self { grid: grid.clone(), values }
    }

    /// Samples `f(x)` for unit vectors `x`.
    pub fn from_points(grid: &Arc<SphericalGrid>, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node_point(i))).collect();
        Self { grid: grid.clone(), values }
    }

    /// Synthesizes a field from spherical-harmonic coefficients.
    pub fn from_spectral(grid: &Arc<SphericalGrid>, coeffs: &SpectralField) -> Self {
        Self { grid: grid.clone(), values: grid.synthesize(coeffs) }
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Nodewise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch { expected: self.grid.describe(), found: other.grid.describe() })
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn range(&self) -> FieldRange {
        FieldRange { min: self.min(), max: self.max() }
    }

    /// `∫_{S²} f dΩ` by Gauss–Legendre × trapezoid quadrature.
    pub fn integrate(&self) -> f64 {
        self.grid.integrate_values(&self.values)
    }

    pub fn mean(&self) -> f64 {
        self.integrate() / (4.0 * std::f64::consts::PI)
    }

    /// `∫ f g dΩ`.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        Ok(self.zip_with(other, |a, b| a * b)?.integrate())
    }

    pub fn spectral(&self) -> SpectralField {
        self.grid.analyze(&self.values)
    }

    /// Spherical Laplacian by analysis, multiplication by `-l(l+1)` and
    /// synthesis. Content above `lmax` is discarded. The mean is removed
    /// before analysis so that constants map to exactly zero.
    pub fn laplacian(&self) -> Self {
        let mean = self.mean();
        let centred: Vec<f64> = self.values.iter().map(|v| v - mean).collect();
        let coeffs = self.grid.analyze(&centred).laplacian();
        Self::from_spectral(&self.grid, &coeffs)
    }

    /// Orthogonal projection onto degrees `≤ lmax`.
    pub fn band_limited(&self) -> Self {
        Self::from_spectral(&self.grid, &self.spectral())
    }
}

/// `∫_{S²} f dΩ`.
pub fn integrate(f: &ScalarField) -> f64 {
    f.integrate()
}

/// `∫_{S²} f dΩ` for a field that must live on `grid`.
pub fn integrate_on(grid: &SphericalGrid, f: &ScalarField) -> Result<f64> {
    if !grid.same_shape(f.grid()) {
        return Err(Error::GridMismatch { expected: grid.describe(), found: f.grid().describe() });
    }
    Ok(f.integrate())
}

/// Spherical Laplacian of `f`.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    f.laplacian()
}
