//! Error type shared by every pipeline stage.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset contains no records")]
    EmptyDataset,

    #[error("record '{id}' has dimension {found}, expected {expected}")]
    DimMismatch {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate record id '{0}'")]
    DuplicateId(String),

    #[error("record '{id}' has a non-finite value at index {index}")]
    NonFiniteValue { id: String, index: usize },

    #[error("malformed record: {0}")]
    MalformedRecord(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("clustering produced no clusters")]
    EmptyClustering,

    #[error("degenerate dataset: global synthetic share is {0}, need a real/synthetic mix")]
    DegenerateDataset(f64),

    #[error("no weak nodes at threshold (weak pool is empty)")]
    EmptyWeakPool,

    #[error("tag key '{0}' is absent from every real record in the weak pool")]
    TagKeyAbsent(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("mismatched inputs: {0}")]
    MismatchedInputs(String),

    #[error("{}:{line}: {source}", path.display())]
    AtLine {
        path: PathBuf,
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Strips file/line wrappers and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLine { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
