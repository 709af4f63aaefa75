//! Command-line harness for the `mgprox` solvers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration; exit code 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] mgprox::Error),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(mgprox::Error::TooDeep { .. } | mgprox::Error::InvalidGrid(_)) => 2,
            _ => 1,
        }
    }
}
