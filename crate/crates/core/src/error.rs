use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the domain of the operation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The operation is not available for the given exponent family or regime.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An iterative or adaptive method failed to reach its tolerance.
    #[error("{what} did not converge (estimated error {estimate:.3e}, requested {requested:.3e})")]
    NonConvergence {
        what: &'static str,
        estimate: f64,
        requested: f64,
    },

    /// Empty input where at least one element is required.
    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
