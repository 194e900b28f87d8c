//! Command-line driver for the two-qubit memory-kernel simulator: figure
//! presets, TOML run configuration, parameter sweeps, and CSV/JSON output.

pub mod config;
pub mod output;
pub mod runner;

use std::fmt;

/// Failure classification mirrored in the process exit code: configuration
/// problems exit with 2, integration or I/O problems with 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Runtime(msg) => write!(f, "run failed: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
