use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use maxreg_lab::config::parse_real;
use maxreg_lab::{execute, Experiment, ExperimentConfig};

/// Run a maxreg experiment and write its JSON summary and CSV tables.
#[derive(Debug, Parser)]
#[command(name = "maxreg", version)]
struct Cli {
    /// square-demo, theorem1-sweep, counterexample, continuity,
    /// lipschitz-enk, oracle-equivalence or bench
    experiment: String,
    /// `key = value` config file; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (results go to <out>/<experiment>/)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid spacing, e.g. 0.03125 or 1/32
    #[arg(long = "grid-h", global = true)]
    grid_h: Option<String>,
    /// Norm: linf, l1, l2, lp:P or rect:W1,W2,...
    #[arg(long, global = true)]
    norm: Option<String>,
    /// Radius cap for local maximal functions
    #[arg(long = "radius-cap", global = true)]
    radius_cap: Option<String>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized corpus parameters
    #[arg(long, global = true)]
    seed: Option<u64>,
}

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let exp: Experiment = cli.experiment.parse()?;
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_file(p, Some(exp))?,
        None => ExperimentConfig::new(exp),
    };
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(h) = &cli.grid_h {
        cfg.grid_h = parse_real(h).map_err(anyhow::Error::msg).context("--grid-h")?;
    }
    if let Some(n) = &cli.norm {
        cfg.set("norms", n)?;
    }
    if let Some(r) = &cli.radius_cap {
        cfg.set("radius_caps", r)?;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.check()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Some(t) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cfg) {
        Ok((outcome, paths)) => {
            for c in &outcome.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                println!("{mark}  {}  {}", c.name, c.detail);
            }
            for p in paths {
                println!("wrote {}", p.display());
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
