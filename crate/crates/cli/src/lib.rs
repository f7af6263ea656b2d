//! Configuration loading, experiment dispatch and result serialization for
//! the `zdlab` command-line tool.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, Command, ExperimentConfig};
pub use error::{CliError, ErrorRecord, Result};
pub use run::{execute, run, Output, RunManifest};
