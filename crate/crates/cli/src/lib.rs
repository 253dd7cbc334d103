//! Batch front-end: read a JSON job, run it, emit a JSON or CSV report.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{parse_config, parse_config_with, JobConfig, Overrides};
pub use error::{CliError, ErrorKind};
pub use report::{Record, Report};
pub use run::run;

/// Parses `text` with `overrides` and runs it.
pub fn execute(text: &str, overrides: &Overrides) -> Result<Report, CliError> {
    let job = parse_config_with(text, overrides)?;
    run(&job)
}
