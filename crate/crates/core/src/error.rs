use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Exhaustive enumeration would exceed the configured cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("matrix is singular or ill-conditioned: {0}")]
    Singular(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    /// The parameter range is excluded by the underlying theory.
    #[error("unsupported parameter range: {0}")]
    Unsupported(String),
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Argument(msg()))
    }
}

pub(crate) fn ensure_finite_nonneg(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("{name} must be finite and nonnegative, got {x}")));
    }
    Ok(())
}
