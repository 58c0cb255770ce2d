use thiserror::Error;

/// Errors raised by the geometry, flow and chart routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field lives on a {found} grid, expected {expected}")]
    GridMismatch { expected: String, found: String },

    #[error("field has {found} values, grid has {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at node {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("conformal factor leaves the model bracket ({lo}, {hi}): found {value}")]
    OutsideBracket { lo: f64, hi: f64, value: f64 },

    #[error("time {t} lies at or beyond the extinction time of the solution")]
    PastExtinction { t: f64 },

    #[error("operation requires the de Sitter model, got {0}")]
    RequiresDeSitter(String),

    #[error("no closed-form area law for {0}")]
    NoClosedForm(String),

    #[error("degenerate horizon at r = {r}: h'(r) = {slope}")]
    DegenerateHorizon { r: f64, slope: f64 },

    #[error("h vanishes at r = {0} inside the chart interval")]
    InteriorZero(f64),

    #[error("value {value} outside chart range ({lo}, {hi})")]
    OutOfChart { value: f64, lo: f64, hi: f64 },

    #[error("integrator diverged at t = {t} with area {area}: {reason}")]
    IntegratorDivergence { t: f64, area: f64, reason: String },

    #[error("area fell below the floor at t = {t}, but the closed-form extinction time is {predicted:?}")]
    UnexplainedExtinction { t: f64, predicted: Option<f64> },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
