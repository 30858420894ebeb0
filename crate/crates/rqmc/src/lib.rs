//! Command-line front end and file formats for `rqmc-core`.
//!
//! Reads direction-number tables and raw generator matrices, writes CSV and
//! JSON reports, and runs convergence experiments in parallel.

pub mod cli;
pub mod error;
pub mod formats;
pub mod study;

pub use error::{CliError, CliResult};
