use thiserror::Error;

/// Errors produced by rating, simulation, scaling and audit operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid score {0}: expected 0.0, 0.5 or 1.0")]
    InvalidScore(f64),
    #[error("item {0:?} cannot be compared with itself")]
    SelfMatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("rating table is empty")]
    EmptyTable,
    #[error("{kind} index {index} out of range (len {len})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },
    #[error("{needed} votes per item requested but only {available} raters exist")]
    NotEnoughRaters { needed: usize, available: usize },
    #[error("at least two items are required, got {0}")]
    TooFewItems(usize),
    #[error("at least one comparison is required")]
    NoComparisons,
    #[error("label arrays differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("no item carries the discriminatory feature")]
    NoFeatureItems,
    #[error("at least 2 runs are needed for a standard error, got {0}")]
    TooFewRuns(usize),
    #[error("dataset contains no comparisons")]
    EmptyDataset,
    #[error("unknown item {0:?}")]
    UnknownItem(String),
    #[error("requested {count} comparisons but the dataset holds {available}")]
    CountExceedsDataset { count: usize, available: usize },
    #[error("at least two trajectories are required, got {0}")]
    TooFewTrajectories(usize),
    #[error("rescaled trajectories share no common domain")]
    NoDomainOverlap,
    #[error("target f1 {0} is never reached by the pilot trajectory")]
    TargetNotReached(f64),
    #[error("rater {rater:?} has {records} usable records, not enough for this statistic")]
    InsufficientData { rater: String, records: usize },
    #[error("comparison oracle failed: {0}")]
    Oracle(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
