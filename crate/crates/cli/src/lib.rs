//! Library side of the `catind` command-line harness: experiment drivers,
//! configuration, CSV ingestion and report rendering. The binary in
//! `main.rs` is a thin argument-parsing wrapper around these functions.

pub mod config;
pub mod experiments;
pub mod ingest;
pub mod report;

use thiserror::Error;

/// CLI-level error split by exit code: input problems (bad files, unknown
/// columns, degenerate data) exit with 2, configuration problems (bad
/// flags, malformed grids) with 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

impl From<catind_core::Error> for CliError {
    fn from(e: catind_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
