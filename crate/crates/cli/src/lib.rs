//! Command-line front end for `wgqed`: run configurations, CSV output and
//! parameter sweeps.

pub mod args;
pub mod commands;
pub mod config;
mod error;
pub mod table;

pub use commands::{run, RunOutput};
pub use config::{ConfigFile, RunConfig, Subcommand, SweepParameter, SweepSpec};
pub use error::CliError;
pub use table::Table;
