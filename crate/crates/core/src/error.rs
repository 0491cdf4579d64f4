use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("value outside the domain: {0}")]
    Domain(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("degenerate dimension n={0}: the sphere radius is stationary (n-3 factor vanishes)")]
    DegenerateDimension(usize),
    #[error("radius fell below the extinction floor at t={t}")]
    Extinction { t: f64 },
    #[error("grid does not cover the layer window: {0}")]
    Coverage(String),
    #[error("Picard iteration is not contracting: {0}")]
    LipschitzViolation(String),
    #[error("fixed-point iteration failed to contract: {0}")]
    ContractionFailure(String),
    #[error("projection denominator too small at t={t}: {value:e}")]
    Threshold { t: f64, value: f64 },
    #[error("instability at step {step}: {reason}")]
    Instability { step: usize, reason: String },
    #[error("interface topology: {0}")]
    Topology(String),
    #[error("singular banded system at row {0}")]
    Singular(usize),
    #[error("unsupported for this potential: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
