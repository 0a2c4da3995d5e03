use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Evaluation requested outside the domain of the function, e.g. a
    /// retarded susceptibility below the real axis.
    #[error("domain error: {0}")]
    Domain(String),

    /// Tabulated data cannot be continued off the real frequency grid.
    #[error("unsupported continuation: {0}")]
    UnsupportedContinuation(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("contour passes too close to a zero: {0}")]
    ContourTooClose(String),

    #[error("quadrature did not converge: {0}")]
    NotConverged(String),

    /// The motion is not stable and causal, so it is not time-evolved.
    #[error("stability: {0}")]
    Stability(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
