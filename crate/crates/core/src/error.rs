use thiserror::Error;

/// Errors raised by the geometry, quadrature and flux layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("degenerate immersion at u = {u:?}: {reason}")]
    DegenerateImmersion { u: Vec<f64>, reason: String },

    #[error("point u = {u:?} is outside the domain (required margin {margin})")]
    OutOfDomain { u: Vec<f64>, margin: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("non-finite integrand at node u = {node:?}")]
    Integration { node: Vec<f64> },

    #[error("unsupported region: {0}")]
    UnsupportedRegion(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
