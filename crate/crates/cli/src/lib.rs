//! Experiment driver for the `maxreg-core` grid laboratory.
//!
//! [`ExperimentConfig`] describes a run, [`experiments::run`] performs it,
//! and [`execute`] additionally writes the outputs to disk.

// `!(x > 0)` is used so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod corpus;
pub mod experiments;
pub mod invariants;
pub mod report;

use std::path::PathBuf;

pub use config::{CorpusSelection, Experiment, ExperimentConfig};
pub use report::{Check, Outcome, Table};

/// Runs the configured experiment and writes its files under
/// `<out>/<experiment>/`. Returns the outcome and the written paths.
pub fn execute(cfg: &ExperimentConfig) -> anyhow::Result<(Outcome, Vec<PathBuf>)> {
    let outcome = experiments::run(cfg)?;
    let echo = serde_json::to_value(cfg)?;
    let paths = outcome.write(&cfg.experiment_dir(), &echo)?;
    Ok((outcome, paths))
}
