//! The experiment drivers. Each `run_*` takes a config and returns an
//! [`Outcome`]; [`run`] dispatches on the configured tag.

mod bench;
mod continuity;
mod counterexample;
mod lipschitz;
mod oracle;
mod square;
mod sweep;

use std::time::Instant;

use anyhow::Context;
use maxreg_core::{
    maximal_bd_pruned, maximal_brute, Extension, Grid64, GridFunction64, MaxField64, NormSpec64,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::report::{Outcome, Timing};

pub use bench::run_bench;
pub use continuity::run_continuity;
pub use counterexample::run_counterexample;
pub use lipschitz::run_lipschitz_enk;
pub use oracle::run_oracle_equivalence;
pub use square::run_square_demo;
pub use sweep::{run_theorem1_sweep, SweepRow, SweepSummary, TheoremReport};

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    match cfg.experiment {
        Experiment::SquareDemo => run_square_demo(cfg),
        Experiment::Theorem1Sweep => run_theorem1_sweep(cfg).map(TheoremReport::into_outcome),
        Experiment::Counterexample => run_counterexample(cfg),
        Experiment::Continuity => run_continuity(cfg),
        Experiment::LipschitzEnk => run_lipschitz_enk(cfg),
        Experiment::OracleEquivalence => run_oracle_equivalence(cfg),
        Experiment::Bench => run_bench(cfg),
    }
}

/// The cube `[-e, e]^dim` at spacing `h`, with `e` taken from the config.
pub(crate) fn grid_for(cfg: &ExperimentConfig, dim: usize, h: f64) -> anyhow::Result<Grid64> {
    Grid64::new(dim, &cfg.half_extent_for(dim), h)
        .with_context(|| format!("grid dim={dim} h={h} half_extent={:?}", cfg.half_extent_for(dim)))
}

/// Uncentered maximal field: the pruned kernel when `f` is block
/// decreasing and `brute` is off, brute force otherwise.
pub(crate) fn maximal(
    f: &GridFunction64,
    norm: &NormSpec64,
    cap: Option<f64>,
    ext: Extension,
    brute: bool,
) -> maxreg_core::Result<MaxField64> {
    if !brute && maxreg_core::check_block_decreasing(f).passed() {
        maximal_bd_pruned(f, norm, cap, ext)
    } else {
        maximal_brute(f, norm, cap, ext)
    }
}

/// Field values as a grid function.
pub(crate) fn field_function(mf: &MaxField64) -> anyhow::Result<GridFunction64> {
    let ceiling = mf.values().iter().copied().fold(1.0, f64::max);
    Ok(mf.to_grid_function(ceiling)?)
}

/// `norm` adapted to `dim`: rectangle weights are truncated or padded with 1.
pub fn fit_norm(norm: &NormSpec64, dim: usize) -> NormSpec64 {
    match norm {
        NormSpec64::Rectangle { weights } => {
            let mut w = weights.clone();
            w.resize(dim, 1.0);
            NormSpec64::Rectangle { weights: w }
        }
        other => other.clone(),
    }
}

pub(crate) fn cap_label(cap: Option<f64>) -> String {
    cap.map(|c| c.to_string()).unwrap_or_else(|| "none".into())
}

/// Runs `f`, returning its value and pushing a timing entry.
pub(crate) fn timed<R>(timings: &mut Vec<Timing>, label: String, f: impl FnOnce() -> R) -> R {
    let t = Instant::now();
    let r = f();
    timings.push(Timing { label, seconds: t.elapsed().as_secs_f64() });
    r
}
