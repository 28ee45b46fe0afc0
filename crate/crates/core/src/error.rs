use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Gram matrix is not positive definite even with jitter {jitter:e}")]
    NumericalDegeneracy { jitter: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {0:?} lies outside the domain")]
    OutOfDomain(Vec<f64>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate statistics: standard deviation {0} must be positive")]
    DegenerateStatistics(f64),

    #[error("target {target} is outside the range [0, {sup}) of b")]
    OutOfRange { target: f64, sup: f64 },

    #[error("no safe candidate available: {0}")]
    EmptySafeSet(String),

    #[error("environment error: {0}")]
    Environment(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures that originate in the numerical core rather than in
    /// user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalDegeneracy { .. }
                | Error::DegenerateStatistics(_)
                | Error::OutOfRange { .. }
                | Error::EmptySafeSet(_)
                | Error::Environment(_)
        )
    }
}
