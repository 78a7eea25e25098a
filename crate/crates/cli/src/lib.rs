//! Experiment driver for `matvar`: TOML configs, CSV reports and the acceptance suite.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod suite;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use report::Report;
pub use run::{run, Operation};
