use thiserror::Error;

/// Errors raised by measure construction, the transport solvers and the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("atom {index} has invalid weight {weight}")]
    InvalidWeight { index: usize, weight: f64 },

    #[error("atom {index} has a non-finite coordinate")]
    NonFinitePosition { index: usize },

    #[error("scale factor must be nonnegative, got {0}")]
    NegativeScale(f64),

    #[error("quantum must be positive and finite, got {0}")]
    InvalidQuantum(f64),

    #[error("masses differ: source {source_mass}, target {target_mass} (tolerance {tol})")]
    MassMismatch { source_mass: f64, target_mass: f64, tol: f64 },

    #[error("measures must have positive mass")]
    ZeroMass,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("expected one-dimensional measures, got dimension {0}")]
    NotOneDimensional(usize),

    #[error("expected a probability measure, got mass {0}")]
    NotProbability(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),

    #[error("transport solver failed: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
