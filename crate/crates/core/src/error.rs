use thiserror::Error;

/// Errors produced by the reconstruction pipeline and the file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Least-squares system whose numerical rank is below its column count.
    #[error("rank-deficient system: rank {rank} of {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    /// The joint re-estimation inside matching pursuit hit a rank-deficient
    /// column set.
    #[error("reconstruction failed at iteration {iteration}: rank {rank} of {cols} columns")]
    ReconstructionFailed {
        iteration: usize,
        rank: usize,
        cols: usize,
    },

    #[error("search budget exceeded: {candidates} candidate supports > budget {budget}")]
    BudgetExceeded { candidates: u128, budget: u128 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
