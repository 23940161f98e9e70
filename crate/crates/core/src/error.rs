use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("SNR is undefined for an all-zero signal")]
    UndefinedSnr,

    #[error("feedback rank deficiency: {antennas} BS antennas cannot separate {users} users")]
    FeedbackRankDeficiency { antennas: usize, users: usize },

    #[error("uplink channel is rank deficient (smallest singular value {smallest:e}, tolerance {tolerance:e})")]
    RankDeficientUplink { smallest: f64, tolerance: f64 },

    #[error("projection rank {q} exceeds min(K, M) = {max}")]
    RankTooLarge { q: usize, max: usize },

    #[error("degenerate search direction (norm of D*Phi = {norm:e})")]
    DegenerateDirection { norm: f64 },

    #[error("numerical failure at iteration {iteration}: {reason}")]
    NumericalFailure { iteration: usize, reason: String },

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn dims(
        context: &'static str,
        expected: impl std::fmt::Display,
        actual: impl std::fmt::Display,
    ) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    /// True when the error stems from floating point breakdown rather than
    /// from a bad configuration.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NumericalFailure { .. } => true,
            Error::Trial { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
