//! Command-line front end for `recon-core`: system files, run configuration,
//! subcommands and the example suite.

pub mod commands;
pub mod config;
pub mod examples;
pub mod io;

/// Errors surfaced by the command line, each with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or invalid input: exit code 2.
    #[error("{0}")]
    Input(String),
    /// Failures inside the library: exit code 2 for bad arguments, 3 otherwise.
    #[error(transparent)]
    Library(#[from] recon_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use recon_core::Error as E;
        match self {
            CliError::Input(_) => 2,
            CliError::Library(E::Argument(_) | E::Structure(_)) => 2,
            CliError::Library(_) => 3,
        }
    }
}
