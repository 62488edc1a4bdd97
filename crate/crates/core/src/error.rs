use thiserror::Error;

/// Errors raised by the lab's domain operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("datum does not match the loss: {0}")]
    DatumKind(String),

    #[error("operation requires a finite-support distribution")]
    RequiresFiniteSupport,

    #[error("a Monte Carlo budget of at least one sample is required for continuous distributions")]
    ZeroMonteCarloBudget,

    #[error("loss has no smoothness constant; constant-step descent is undefined")]
    NonSmoothLoss,

    #[error("invariant violated: {what} (seed {seed})")]
    InvariantViolation { what: String, seed: u64 },
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
