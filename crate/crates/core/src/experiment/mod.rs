//! Declarative experiments: configuration, the shared pipeline, the task
//! computations, and the runner that writes summaries and plot-ready data.

use std::fmt;
use std::path::PathBuf;

use crate::error::NgrcError;

pub mod config;
pub mod pipeline;
pub mod report;
pub mod runner;
pub mod tasks;

pub use config::{parse_config, validate_config, ConfigError, ExperimentConfig, Task};
pub use runner::{run_experiment, ExperimentReport};

/// Why an experiment stopped.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// A computation failed; `stage` names the step.
    Numerical {
        stage: &'static str,
        source: NgrcError,
    },
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn numerical(stage: &'static str) -> impl Fn(NgrcError) -> RunError {
        move |source| RunError::Numerical { stage, source }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Io { .. } => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical { stage, source } => write!(f, "numerical failure during {stage}: {source}"),
            RunError::Io { path, source } => write!(f, "i/o error on {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}
