//! File formats, the parallel suite runner, sweeps, replay and reports for `longhot-core`.

pub mod dump;
pub mod report;
pub mod runner;
pub mod scene_io;
pub mod suite;
pub mod sweep;
pub mod trace;

use std::path::PathBuf;

/// Errors that make a command unusable as configured. The CLI maps these to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("unknown scene id {0:?}")]
    UnknownScene(String),
    #[error("{0}")]
    Invalid(String),
}

impl ConfigError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| ConfigError::Io { path, source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        ConfigError::Format { path: path.into(), msg: msg.to_string() }
    }
}

pub type Result<T, E = ConfigError> = std::result::Result<T, E>;

/// Version string recorded in reports.
pub fn version() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}
