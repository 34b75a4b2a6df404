use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed elapsed time {raw:?}: {reason}")]
    MalformedTime { raw: String, reason: &'static str },

    #[error("schema error{}: {reason}", line_suffix(*.line))]
    Schema { line: Option<usize>, reason: String },

    #[error("invalid {field}{}: {reason}", line_suffix(*.line))]
    Validation {
        field: &'static str,
        line: Option<usize>,
        reason: String,
    },

    #[error("dataset has no records")]
    EmptyDataset,

    #[error("feature {0} is constant in the training data")]
    DegenerateFeature(&'static str),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("non-finite value during training{}", epoch_suffix(*.epoch))]
    NumericOverflow { epoch: Option<usize> },

    #[error("series are empty")]
    EmptySeries,

    #[error("series value at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("actual value at index {index} is zero")]
    DivisionByActualZero { index: usize },

    #[error("pair mean at index {index} is zero")]
    DivisionByPairMeanZero { index: usize },

    #[error("attack source has no record for cycle {cycle}")]
    Coverage { cycle: u32 },

    #[error("empty window")]
    EmptyWindow,

    #[error("window of {requested} cycles exceeds the {available} labeled cycles available")]
    Window { requested: usize, available: usize },

    #[error("record for cycle {cycle} has no SOC label")]
    Unlabeled { cycle: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model file line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", .path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            Error::Schema { reason, .. } => Error::Schema {
                line: Some(line),
                reason,
            },
            Error::Validation { field, reason, .. } => Error::Validation {
                field,
                line: Some(line),
                reason,
            },
            other => other,
        }
    }
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" on line {l}")).unwrap_or_default()
}

fn epoch_suffix(epoch: Option<usize>) -> String {
    epoch.map(|e| format!(" at epoch {e}")).unwrap_or_default()
}
