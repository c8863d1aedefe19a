//! Error types shared across the crate.

use thiserror::Error;

/// A violation of the group-partition invariants, reported against the
/// first offending group/index encountered (indices are 0-based).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionViolation {
    #[error("group {group} is empty")]
    EmptyGroup { group: usize },
    #[error("group {group} contains out-of-range atom index {index} (atom count {p})")]
    OutOfRange { group: usize, index: usize, p: usize },
    #[error("atom index {index} appears in more than one group (second occurrence in group {group})")]
    Overlap { group: usize, index: usize },
    #[error("atom index {index} is not assigned to any group")]
    Gap { index: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(#[from] PartitionViolation),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("unsupported format_version {0} (supported: 1)")]
    UnsupportedVersion(u64),

    #[error("wrong artifact kind: expected {expected}, found {found}")]
    WrongKind { expected: String, found: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub fn value(msg: impl Into<String>) -> Self {
        Error::InvalidValue(msg.into())
    }

    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
