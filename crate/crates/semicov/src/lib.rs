//! Command-line front end for `semicov-core`: kernel config files, CSV and
//! JSON output, run manifests and the `semicov` subcommands.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;

pub use cli::run;
pub use error::{CliError, CliResult};
