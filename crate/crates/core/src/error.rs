use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PmeError {
    /// An argument lies outside the range where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two inputs that must share a discretization do not.
    #[error("incompatible inputs: {0}")]
    Mismatch(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("linear solver failed: {0}")]
    LinearSolve(String),

    /// Finite-difference derivative estimates disagree across step sizes.
    #[error("finite-difference estimate unstable: {0}")]
    FiniteDifference(String),

    /// Kernel mass leaks to the edge of the padded transform grid.
    #[error("aliasing check failed: {edge_share:.3e} of the kernel mass sits near the grid boundary")]
    Aliasing { edge_share: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl PmeError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        PmeError::Domain(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        PmeError::Mismatch(msg.into())
    }

    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            PmeError::Domain(_) | PmeError::Mismatch(_) | PmeError::Format(_) | PmeError::Io(_)
        )
    }
}

impl From<std::io::Error> for PmeError {
    fn from(e: std::io::Error) -> Self {
        PmeError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PmeError>;
