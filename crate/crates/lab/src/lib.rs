//! Batch front end for `bulab-core`: file formats, map registry, experiment
//! runners and report emission.

pub mod config;
pub mod io;
pub mod plot;
pub mod report;
pub mod run;
pub mod subjects;

pub use config::{Command, RunConfig};
pub use report::{report_schema_version, Report};
pub use run::{execute, run, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] bulab_core::error::Error),
}

impl LabError {
    pub fn usage(msg: impl Into<String>) -> Self {
        LabError::Usage(msg.into())
    }
}

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FLOOR_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
