//! Command-line driver for `pflow-core`: study execution, structure checks,
//! interpolation studies and the CSV/JSON table formats.

pub mod commands;
pub mod config;
pub mod output;
pub mod parallel;

use pflow_core::harness::HarnessError;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const SOLVER: u8 = 1;
    pub const CHECK_FAILED: u8 = 2;
    pub const CONFIG: u8 = 64;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Solver(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Solver(_) | CliError::Io(_) => exit::SOLVER,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::InvalidConfig(_) | HarnessError::Structure(_) | HarnessError::Coupling { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Solver(e.to_string()),
        }
    }
}
