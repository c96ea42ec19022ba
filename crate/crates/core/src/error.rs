use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid units: {0}")]
    InvalidUnits(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    /// A numerical guard (CFL, phase wrap, resolution) tripped.
    #[error("numerical guard `{guard}` violated: {detail}")]
    Guard { guard: &'static str, detail: String },

    #[error("wavefunction is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("every grid point is below the node threshold")]
    AllMasked,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error("flow line seed {seed:?} rejected: {reason}")]
    BadSeed { seed: Vec<f64>, reason: String },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for failures that come from a numerical guard rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Guard { .. } | Error::NoConvergence { .. } | Error::NotNormalized { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
