use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite entry at position {0}")]
    NonFinite(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit count {n} exceeds the dense limit of {max}")]
    TooLarge { n: usize, max: usize },

    #[error("operator does not commute with the total spin (max |[H, S^2]| = {0:e})")]
    NotPermutationSymmetric(f64),

    #[error("state is not normalized (|norm - 1| = {0:e})")]
    NotNormalized(f64),

    #[error("fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("fidelity target {target} not reached for T in [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64, target: f64 },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_) | Error::BracketFailure { .. } | Error::NoConvergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
