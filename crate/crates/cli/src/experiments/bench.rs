use std::time::Instant;

use maxreg_core::{generate, maximal_bd_pruned, maximal_brute, Grid64, ProfileSpec64};

use super::oracle::mismatches;
use crate::config::ExperimentConfig;
use crate::report::{num, Outcome, Table};

/// Brute force against the pruned kernel on the square indicator for each
/// size in `bench.sizes` (nodes per axis, `d = 2`, box `[-e, e]^2`).
///
/// The `bench` table holds wall-clock times and is therefore the one output
/// that differs between reruns.
pub fn run_bench(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let mut out = Outcome::new(cfg.experiment.tag());
    out.threshold("min_speedup_linf_largest", cfg.bench_min_speedup);
    out.threshold("target_speedup_linf_largest (soft)", cfg.bench_target_speedup);

    let e = cfg.half_extent[0];
    let spec = ProfileSpec64::Square { side: 1.0 };
    let mut table = Table::new("bench", &["n", "d", "norm", "algo", "seconds"]);
    let mut speedups = Table::new("speedup", &["n", "norm", "speedup", "equal"]);
    let largest = cfg.bench_sizes.iter().copied().max().unwrap_or(0);
    for &n in &cfg.bench_sizes {
        anyhow::ensure!(n >= 3 && n % 2 == 1, "bench size {n} must be odd and at least 3");
        let h = 2.0 * e / (n - 1) as f64;
        let g = Grid64::new(2, &[e, e], h)?;
        let f = generate(&spec, &g)?;
        for norm in &cfg.norms {
            let t = Instant::now();
            let p = maximal_bd_pruned(&f, norm, None, cfg.extension)?;
            let tp = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let b = maximal_brute(&f, norm, None, cfg.extension)?;
            let tb = t.elapsed().as_secs_f64();
            let equal = mismatches(&b, &p).is_empty();
            let speedup = tb / tp;
            for (algo, s) in [("pruned", tp), ("brute", tb)] {
                table.push(vec![n.to_string(), "2".into(), norm.to_string(), algo.into(), num(s)]);
            }
            speedups.push(vec![n.to_string(), norm.to_string(), format!("{speedup:.2}"), equal.to_string()]);
            out.check(format!("pruned equals brute n={n} {norm}"), equal, format!("square d=2 h={h}"));
            if n == largest && *norm == maxreg_core::NormSpec64::Linf {
                out.check(
                    format!("linf speedup at n={n}"),
                    speedup >= cfg.bench_min_speedup,
                    format!("speedup={speedup:.2} required={}", cfg.bench_min_speedup),
                );
                out.summarize("linf_speedup_largest", speedup);
                out.summarize("soft_target_met", speedup >= cfg.bench_target_speedup);
            }
        }
    }
    out.tables.push(table);
    out.tables.push(speedups);
    Ok(out)
}
