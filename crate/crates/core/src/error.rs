use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A grid or panel rule is too coarse for the requested accuracy.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// An integrand produced a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),
    /// The wavelet profile does not have a finite admissibility constant.
    #[error("admissibility error: {0}")]
    Admissibility(String),
    /// The requested discretization exceeds the memory budget.
    #[error("resource error: {0}")]
    Resource(String),
    /// An iterative or extrapolation procedure failed to converge.
    #[error("convergence error: {0}")]
    Convergence(String),
    /// Malformed input data (profile files and similar).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
