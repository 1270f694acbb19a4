//! Experiment runner for `langevin-kit`: JSON configs in, CSV and JSON out.
//!
//! Every command is a thin adapter over library calls; the binary only adds
//! argument parsing, file output and exit codes.

pub mod commands;
pub mod config;
pub mod error;
pub mod json;

pub use commands::{cmd_bound, cmd_figure1, cmd_plan, cmd_sample, cmd_validate, write_outputs, Command};
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
}
