//! File formats and the command-line driver for `rembed`.
//!
//! - [`svmlight`]: multilabel svmlight reader and canonical writer
//! - [`formats`]: `REMBED`/`REMODEL` text files and prediction lists
//! - [`app`]: clap definitions and command dispatch
//! - [`error`]: error categories, exit codes and one-line diagnostics

pub mod app;
pub mod error;
pub mod formats;
pub mod svmlight;

pub use app::{run, Cli, Command};
pub use error::{CliError, Result};
