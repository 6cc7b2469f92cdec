use crate::rational::Rational;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("reconstruction conflict: {0}")]
    ReconstructionConflict(String),
    #[error("instance is not exact: defect {0}")]
    NonExact(Rational),
    #[error("invalid deletion target: {0}")]
    InvalidTarget(String),
    #[error("non-positive weight: {0}")]
    NonPositiveWeight(String),
    #[error("cannot delete a leaf from a two-point instance")]
    BaseCase,
    #[error("invalid insertion: {0}")]
    InvalidInsertion(String),
    #[error("no instance with distinct actions after {0} attempts")]
    GenerationExhausted(usize),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that indicate a bug or a counterexample rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::InvariantViolation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
