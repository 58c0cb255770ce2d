//! Scalar fields on the unit sphere: a Gauss–Legendre × uniform-longitude
//! grid, spectral Laplacian, quadrature, random band-limited data and
//! snapshot I/O.

mod field;
mod grid;
mod random;
mod snapshot;
mod spectral;

pub use field::{integrate, integrate_on, laplacian, FieldRange, ScalarField};
pub use grid::{gauss_legendre, SphericalGrid, DEFAULT_NLAT, DEFAULT_NLON};
pub use random::{random_coefficients, random_sup_bound, synthesize_random};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotFormat};
pub use spectral::SpectralField;
