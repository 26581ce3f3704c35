//! Command-line driver for the donation-game cellular automaton.
//!
//! Every subcommand writes its outputs under the `--out` prefix together with
//! a `<prefix>.meta.json` holding the merged configuration; passing that file
//! back through `--config` reproduces the outputs byte for byte.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod pbm;
pub mod pool;

pub use args::Cli;
pub use commands::execute;
pub use config::RunConfig;
pub use error::CliError;
