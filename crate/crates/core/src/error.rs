use std::path::PathBuf;

/// Errors raised by the audit library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("label space needs at least 2 labels, got {0}")]
    TooFewLabels(usize),

    #[error("group partition needs at least 2 groups, got {0}")]
    TooFewGroups(usize),

    #[error("invalid group partition: {0}")]
    InvalidPartition(String),

    #[error("label {label} out of range for a label space of size {size}")]
    LabelOutOfRange { label: usize, size: usize },

    #[error("group {group} out of range for a partition of {count} groups")]
    GroupOutOfRange { group: usize, count: usize },

    #[error("no records supplied")]
    EmptyRecords,

    #[error("records failed validation: {0}")]
    InvalidRecords(String),

    #[error("fewer than two non-empty groups ({0} non-empty)")]
    InsufficientGroups(usize),

    #[error("no label has defined cells in at least two groups")]
    NoComparableLabel,

    #[error("inverted bounds: lower {lower} > upper {upper}")]
    InvertedBounds { lower: f64, upper: f64 },

    #[error("record {index} has no intrinsic label")]
    MissingIntrinsicLabel { index: usize },

    #[error("notion kind mismatch: {expected} vs {found}")]
    KindMismatch { expected: String, found: String },

    #[error("rate tables have different shapes")]
    ShapeMismatch,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid smoothing parameter {0} (must be finite and >= 0)")]
    InvalidSmoothing(f64),

    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
