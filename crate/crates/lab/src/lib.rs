//! Experiment harness for `nicom-core`: config files, replications,
//! horizon sweeps and result files.

pub mod audit;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod replicate;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{LabError, Result};
pub use experiment::{build, Experiment, DEFAULT_BUDGET};
