use thiserror::Error;

/// Errors raised by the library.
///
/// Variants follow the failure classes callers need to distinguish: bad
/// shapes, bad arguments, numerically singular operators, resource caps and
/// iterative procedures that did not reach their tolerance.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("singular operator: {what} (smallest singular value {sigma_min:e}, relative threshold {threshold:e})")]
    Singular {
        what: String,
        sigma_min: f64,
        threshold: f64,
    },

    #[error("resource cap exceeded: {0}")]
    Cap(String),

    #[error("did not converge: {what} (residual {residual:e})")]
    Convergence { what: String, residual: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
