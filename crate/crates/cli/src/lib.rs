//! Experiment runner: each subcommand loads JSON inputs, runs one pipeline
//! of `subgauss-core`, and writes `summary.json` plus CSV tables to the
//! output directory.
//!
//! Exit status is 0 when every check passes, 2 when a check fails and 1
//! on bad input.

mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Outcome};
pub use config::{Command, ExperimentConfig};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    ConfigParse(String),

    #[error("input file {path}: {reason}")]
    InputMissing { path: PathBuf, reason: String },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] subgauss_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
