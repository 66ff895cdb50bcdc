use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Some scenario admits no feasible second-stage solution.
    #[error("two-stage infeasible: scenario {scenario} has no feasible second-stage solution")]
    TwoStageInfeasible { scenario: usize },

    /// Greedy covering stalled: no policy covers any of the listed scenarios at v*.
    #[error("uncoverable scenarios at v*: {scenarios:?}")]
    Uncoverable { scenarios: Vec<usize> },

    #[error("guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("point {0:?} is not a member of the second-stage set")]
    NotInY(Vec<i64>),

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
