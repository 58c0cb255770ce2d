//! Null mean curvature flow of cross sections of shear-free lightcones in
//! static spherically symmetric spacetimes, with the closed-form laws it
//! obeys in the de Sitter, Minkowski and anti-de Sitter cones.
//!
//! A cross section is a positive conformal factor `ω` on the round sphere,
//! with induced metric `ω² dΩ²`. The flow moves it along the null generator
//! with speed `-θ/2`, which here reduces to a parabolic equation for `ω`.

pub mod error;
pub mod exact_solutions;
pub mod flow_engine;
pub mod kruskal;
pub mod conformal_geometry;
pub mod sphere_field;
pub mod verify;

pub use error::{Error, Result};
pub use conformal_geometry::{ConformalFactor, HProfile, LaurentProfile, LightconeModel};
pub use exact_solutions::{AncientKind, AncientSolution, LorentzBoost, StcmcParams};
pub use flow_engine::{FlowConfig, FlowSeries, FlowState, FlowSummary, Outcome, Scheme};
pub use kruskal::{ChartOptions, ClassSModel, KruskalChart};
pub use sphere_field::{ScalarField, SnapshotFormat, SpectralField, SphericalGrid};
pub use verify::{Report, Suite, VerifyOptions};
