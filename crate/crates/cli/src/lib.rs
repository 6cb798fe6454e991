//! Configuration loading, presets, experiment dispatch and run manifests for
//! the `lpp-sim` binary.

use std::path::{Path, PathBuf};

pub mod config;
pub mod experiments;
pub mod output;
pub mod presets;

pub use config::{Experiment, ExperimentConfig, FieldError};
pub use experiments::{run, RunOptions};
pub use output::RunManifest;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "LPP_SIM_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{origin}:{line}:{column}: {message}")]
    Parse { origin: String, line: usize, column: usize, message: String },
    #[error("invalid configuration:\n{}", list(.0))]
    Validation(Vec<FieldError>),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: lpp_core::Error,
    },
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn list(errors: &[FieldError]) -> String {
    errors.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn numerical(context: impl Into<String>) -> impl FnOnce(lpp_core::Error) -> Self {
        let context = context.into();
        move |source| CliError::Numerical { context, source }
    }

    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }
}
