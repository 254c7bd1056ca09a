//! Config-driven experiment runner for `dressq`.
//!
//! Each task reads one TOML file, runs the pipeline and writes CSV series,
//! JSON reports and a `manifest.json` into the output directory.

pub mod config;
mod error;
pub mod output;
pub mod run;
pub mod validate;

pub use config::{ExperimentConfig, Task};
pub use error::{CliError, CliResult};
pub use run::{execute, Outcome, RunOptions};
