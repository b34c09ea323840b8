//! Front end for the `wavemix` binary.
//!
//! Every subcommand writes its outputs into an output directory together
//! with a `manifest.json` that records the fully resolved configuration and
//! the SHA-256 digests of its inputs; `wavemix replay` re-runs a manifest.

pub mod args;
pub mod commands;
pub mod config;
pub mod io;
pub mod manifest;

use std::process::ExitCode;

use thiserror::Error;

/// Error carrying the process exit status: 2 for usage and validation
/// problems, 1 for runtime and numerical failures.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl From<wavemix::Error> for CliError {
    fn from(e: wavemix::Error) -> Self {
        use wavemix::Error as E;
        match e {
            E::UnsupportedFilter(_) | E::Shape(_) | E::Level(_) | E::Parameter(_) | E::Domain(_) => {
                CliError::Usage(e.to_string())
            }
            E::RankDeficient { .. } | E::DegenerateSignal(_) | E::Replicate { .. } => {
                CliError::Runtime(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn io_error(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}
