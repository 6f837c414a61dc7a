//! File formats, synthetic data and the `splinetaylor` command-line tool
//! built on `splinetaylor-core`.

pub mod cli;
pub mod compare;
pub mod error;
pub mod expr;
pub mod formats;
pub mod report;
pub mod synth;

pub use error::{CliError, ExitCode, Result};
