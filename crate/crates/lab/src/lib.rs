//! Experiment runner for `stochtrace-core`: JSON configs, a registry of named
//! experiments, CSV exports and a machine-readable `summary.json` per run.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod experiments;
pub mod output;
pub mod par;
pub mod report;
pub mod summary;

pub use config::{ExperimentConfig, ParamDefault, ParamSpec, Params};
pub use error::LabError;
pub use experiments::{find, registry, run_experiment, Experiment};
pub use summary::{Check, Relation, RunSummary};
