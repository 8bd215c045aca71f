//! Declarative experiment runner over the `loggas` library.
//!
//! An [`ExperimentConfig`](config::ExperimentConfig) fully determines a run:
//! the field to sample, the dynamics, the ensemble size, the base seed and
//! the observables to report.

pub mod config;
pub mod error;
pub mod pipeline;

pub use config::ExperimentConfig;
pub use error::CliError;
