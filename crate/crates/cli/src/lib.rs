//! Command-line front end for the `unitselect` binary.
//!
//! Subcommands: `bounds`, `compare`, `simulate`, `verify`. Exit codes are
//! 0 on success, 1 on input errors and 2 on analytic failures (incompatible
//! data or a failed verification).

pub mod args;
pub mod commands;
pub mod report;

pub use args::Cli;
pub use commands::{run, CliError, Outcome, EXIT_ANALYTIC, EXIT_INPUT, EXIT_OK};
