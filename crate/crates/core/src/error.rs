use thiserror::Error;

pub type Result<T> = std::result::Result<T, PoseError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoseError {
    /// A direction was requested from a (near) zero-length vector.
    #[error("degenerate vector: norm {0:e} is below tolerance")]
    DegenerateVector(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("rotation search needs at least one pairwise constraint")]
    EmptyConstraints,
    #[error("no pair survived the pairwise filter at the estimated rotation")]
    AllPairsRemoved,
    #[error("every translation candidate was rejected")]
    NoCandidates,
    #[error("cannot vote over an empty set of values")]
    EmptyValues,
    #[error("grid search would evaluate {samples} rotations (budget {budget})")]
    GridBudgetExceeded { samples: u64, budget: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for PoseError {
    fn from(err: std::io::Error) -> Self {
        PoseError::Io(err.to_string())
    }
}
