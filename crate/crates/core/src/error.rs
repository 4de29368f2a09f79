use thiserror::Error;

/// Errors raised by the geometry and certificate pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A norm description violates one of the representation invariants.
    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    /// An argument is outside the operation's domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The domain norm is numerically Euclidean, so no convexity gap exists.
    #[error("no gap: {0}")]
    NoGap(String),

    /// A stage of the counterexample construction failed.
    #[error("stage `{stage}` failed: {reason}")]
    Stage { stage: &'static str, reason: String },

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn stage(stage: &'static str, reason: impl Into<String>) -> Self {
        Error::Stage {
            stage,
            reason: reason.into(),
        }
    }

    pub(crate) fn input(reason: impl Into<String>) -> Self {
        Error::InvalidInput(reason.into())
    }

    pub(crate) fn norm(reason: impl Into<String>) -> Self {
        Error::InvalidNorm(reason.into())
    }

    /// True for errors caused by malformed or out-of-domain input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidNorm(_) | Error::InvalidInput(_) | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
