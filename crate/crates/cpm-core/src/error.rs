//! Error type shared by every module of the crate.

use alloc::string::String;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, CpmError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CpmError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("matrix is rank deficient: rank {rank} < {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    /// The candidate actions cannot jointly observe the adversary space.
    #[error("candidates exhausted at rank {rank} < {dimension}: game is not globally observable via this stream")]
    NotGloballyObservable { rank: usize, dimension: usize },

    #[error("feedback for action {index} has length {got}, expected {expected}")]
    FeedbackLengthMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },

    #[error("operation requires a finite, enumerable action set")]
    InfiniteActionSet,

    #[error("arg-secondmax oracle is not available for this game")]
    SecondMaxUnavailable,

    #[error("no second action exists")]
    NoSecondAction,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("snapshot schedules differ between curves")]
    ScheduleMismatch,

    #[error("not enough points for a slope fit: {got} < {needed}")]
    InsufficientPoints { got: usize, needed: usize },

    /// A recovered adversary move violated the deterministic error bound.
    /// This indicates a broken observable set or environment, never noise.
    #[error("recovered move violated the deterministic bound: error {error} > beta_sigma {beta_sigma} + 1e-9")]
    RecoveryBoundViolated { error: f64, beta_sigma: f64 },
}

impl CpmError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        CpmError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
