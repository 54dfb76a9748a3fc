use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed configuration text.
    #[error("parse error: {0}")]
    Parse(String),

    /// Input that violates a documented invariant (negative mass, overlapping support, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Argument outside the domain where a function is defined or reliably computed.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operation undefined for the zero measure.
    #[error("operation undefined for the empty measure")]
    EmptyMeasure,

    /// A precondition on the measure or parameters does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Adaptive quadrature or series summation failed to reach the requested tolerance.
    #[error("accuracy error: {message} (estimate {estimate:e}, error {error:e})")]
    Accuracy {
        message: String,
        estimate: f64,
        error: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
