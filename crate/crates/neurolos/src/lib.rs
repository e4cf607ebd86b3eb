//! Files, configuration and pipeline stages for the neurolos benchmark.
//!
//! The `neurolos` binary is a thin wrapper over [`pipeline::run_stages`].

pub mod config;
pub mod error;
pub mod exec;
pub mod io;
pub mod pipeline;

pub use config::ExperimentConfig;
pub use error::{FailureKind, RunError};
pub use exec::RayonExecutor;
pub use pipeline::{parse_stages, run_stages, Run, Stage};
