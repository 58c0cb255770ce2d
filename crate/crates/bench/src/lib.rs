//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use nullflow::conformal_geometry::ConformalFactor;
use nullflow::sphere_field::synthesize_random;
use nullflow::SphericalGrid;

/// A perturbed sphere of area `area` on an `nlat × 2·nlat` grid.
pub fn perturbed_sphere(nlat: usize, area: f64) -> (Arc<SphericalGrid>, ConformalFactor) {
    let grid = SphericalGrid::new(nlat, 2 * nlat).expect("valid grid");
    let phi = synthesize_random(&grid, 7, 4, 0.1).expect("valid perturbation");
    let omega = ConformalFactor::from_log(phi).with_area(area).expect("positive area");
    (grid, omega)
}
