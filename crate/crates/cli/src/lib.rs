//! Command-line front end: density tables, distribution slices, figure
//! reproduction, Monte Carlo zero runs, and the verification suite.
//!
//! Command logic lives here so the integration tests can drive it directly;
//! `main` only parses the top-level command and maps errors to exit codes.

use std::fmt;

pub mod commands;
pub mod config;
pub mod out;
pub mod svg;

/// Process outcome: usage problems exit 2, failed runs or failed
/// invariants exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Run(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

/// Wraps any displayable failure as a run error (exit 1).
pub fn run_err(e: impl fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}
