//! Failure classes of a run and their exit codes.

use neurolos_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Config,
    Data,
    Training,
}

impl FailureKind {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Config => 2,
            FailureKind::Data => 3,
            FailureKind::Training => 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{kind:?} error: {source:#}")]
pub struct RunError {
    pub kind: FailureKind,
    #[source]
    pub source: anyhow::Error,
}

impl RunError {
    pub fn new(kind: FailureKind, source: anyhow::Error) -> RunError {
        RunError { kind, source }
    }

    pub fn config(source: anyhow::Error) -> RunError {
        RunError::new(FailureKind::Config, source)
    }

    /// Classifies a stage failure: divergence and search exhaustion are
    /// training failures wherever they surface, everything else takes the
    /// stage's default class.
    pub fn from_stage(default: FailureKind, source: anyhow::Error) -> RunError {
        let training = source.chain().any(|e| {
            matches!(
                e.downcast_ref::<CoreError>(),
                Some(CoreError::Divergence { .. } | CoreError::NoCompletedTrial { .. })
            )
        });
        let kind = if training { FailureKind::Training } else { default };
        RunError::new(kind, source)
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}
