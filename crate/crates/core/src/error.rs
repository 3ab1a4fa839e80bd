use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("{what} is not positive definite")]
    NotPositiveDefinite { what: &'static str },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("Hessian is singular (rank-deficient design?)")]
    SingularHessian,

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("group {group} has a zero count; the profile MLE is undefined")]
    ZeroCount { group: usize },

    #[error("no admissible truncation level up to the cap m <= {cap}")]
    Infeasible { cap: usize },

    #[error("quadrature box too small: boundary density ratio {ratio:e}")]
    BoxTooSmall { ratio: f64 },

    #[error("log-density is not finite at the initial point")]
    NonFiniteDensity,

    #[error("linear predictor {value} outside the family domain")]
    Domain { value: f64 },
}

pub type Result<T> = core::result::Result<T, CoreError>;

pub(crate) fn invalid(msg: impl Into<String>) -> CoreError {
    CoreError::InvalidInput(msg.into())
}
