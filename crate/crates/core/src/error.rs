use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("unknown test abbreviations: {}", .0.join(", "))]
    UnknownTests(Vec<String>),

    #[error("class {class} has {count} rows, at least {needed} required")]
    ClassTooSmall { class: usize, count: usize, needed: usize },

    #[error("class {class} has {count} real rows, not enough for k_neighbors = {k}; use k_neighbors < {count}")]
    SmoteNeighbors { class: usize, count: usize, k: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("model `{0}` exposes no feature importance")]
    UnsupportedModel(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("training diverged at epoch {epoch}: {detail}")]
    Divergence { epoch: usize, detail: String },

    #[error("no trial completed ({failed} failed, {pruned} pruned)")]
    NoCompletedTrial { failed: usize, pruned: usize },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
