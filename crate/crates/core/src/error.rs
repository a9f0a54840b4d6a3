use thiserror::Error;

/// Errors raised by the numerical toolkit.
///
/// Validation failures are hard errors: a state that is not Hermitian to the
/// global tolerance, a channel that is not trace preserving, or a subsystem
/// label that does not exist is rejected instead of being silently repaired.
#[derive(Debug, Error)]
pub enum Error {
    #[error("subsystem label `{0}` appears more than once")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("factor `{0}` must have positive dimension")]
    ZeroDimension(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension budget exceeded: {required} matrix entries required, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("identity check failed: {0}")]
    IdentityViolation(String),

    #[error("no {n}-type lies within l1 distance {delta} of the spectrum (closest achievable: {min_distance})")]
    NoTypeWithinDelta {
        n: usize,
        delta: f64,
        min_distance: f64,
    },

    #[error("code dimension {r_dim} exceeds coding subspace dimension {s_dim}")]
    CodeTooLarge { r_dim: usize, s_dim: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
