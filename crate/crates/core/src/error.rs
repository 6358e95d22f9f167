use thiserror::Error;

/// Errors raised by grid construction, I/O and the maximal-function kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sampling failed at node {coords:?}: {reason}")]
    Sampling { coords: Vec<f64>, reason: String },

    #[error("radius {radius} exceeds the grid; largest feasible radius is {max_feasible}")]
    RadiusTooLarge { radius: f64, max_feasible: f64 },

    #[error("radius cap {cap} is below the grid spacing {spacing}")]
    CapBelowSpacing { cap: f64, spacing: f64 },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("input is not block decreasing: {0}")]
    NotBlockDecreasing(String),

    #[error("extension rule mismatch: field computed with {field}, variation requested with {requested}")]
    ExtensionMismatch { field: String, requested: String },

    #[error("malformed grid file, line {line}: {reason}")]
    Format { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
