//! Configuration files, CSV formats and subcommands around `optomem-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod scenarios;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
