//! Experiment runner for `prfslab-core`.
//!
//! An experiment is named in a JSON config together with its parameters and
//! a 64-bit seed. [`run`] dispatches it and returns an [`ExperimentReport`]
//! whose estimates depend only on the config: every trial draws from a
//! stream derived from the seed, so serial and parallel runs agree.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::{BaseKind, Construction, ExperimentConfig, SchemeParams};
pub use error::{HarnessError, Result};
pub use experiments::{experiment_names, run, CpaDistinguisher, ForgerKind, RunOptions, StrategyParams};
pub use report::{Check, ExperimentReport, Relation, ARTIFACT_VERSION};
