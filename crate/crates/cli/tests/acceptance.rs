//! Acceptance suite. Runs each criterion, prints one `PASS`/`FAIL` line per
//! criterion, and exits nonzero if any failed. Experiment outputs are written
//! under `$CARGO_TARGET_TMPDIR/acceptance/`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use maxreg_lab::experiments::{self, run_theorem1_sweep};
use maxreg_lab::invariants::run_invariant_suite;
use maxreg_lab::{Experiment, ExperimentConfig, Outcome};

const ALL_NORMS: &str = "linf; l1; l2; rect:2,1";

type Criterion = fn() -> anyhow::Result<Verdict>;

struct Verdict {
    passed: bool,
    detail: String,
}

fn out_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance")
}

fn config(exp: Experiment, settings: &[(&str, &str)]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(exp);
    for (k, v) in settings {
        cfg.set(k, v).unwrap_or_else(|e| panic!("{k} = {v}: {e}"));
    }
    cfg.out = out_dir();
    cfg.check().expect("acceptance config");
    cfg
}

fn save(cfg: &ExperimentConfig, outcome: &Outcome) {
    let echo = serde_json::to_value(cfg).expect("config echo");
    if let Err(e) = outcome.write(&cfg.experiment_dir(), &echo) {
        eprintln!("warning: could not write {}: {e:#}", cfg.experiment_dir().display());
    }
}

/// Folds an outcome and a wall-clock limit into a verdict, listing the
/// failing checks in the detail.
fn judge(outcome: &Outcome, elapsed: Duration, limit: Option<Duration>, summary: String) -> Verdict {
    let mut detail = summary;
    let failing: Vec<String> =
        outcome.checks.iter().filter(|c| !c.passed).map(|c| format!("{} [{}]", c.name, c.detail)).collect();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    detail.push_str(&format!("; {:.1}s", elapsed.as_secs_f64()));
    if let Some(l) = limit {
        detail.push_str(&format!(" (limit {}s)", l.as_secs()));
    }
    if !failing.is_empty() {
        detail.push_str(&format!("; failing: {}", failing.join("; ")));
    }
    Verdict { passed: outcome.passed() && in_time, detail }
}

fn run_experiment(cfg: &ExperimentConfig) -> anyhow::Result<(Outcome, Duration)> {
    let t = Instant::now();
    let outcome = experiments::run(cfg)?;
    let elapsed = t.elapsed();
    save(cfg, &outcome);
    Ok((outcome, elapsed))
}

fn summary_value(o: &Outcome, key: &str) -> String {
    o.summary.get(key).map(|v| v.to_string()).unwrap_or_else(|| "-".into())
}

fn square_variation() -> anyhow::Result<Verdict> {
    let cfg = config(Experiment::SquareDemo, &[("grid_h", "1/64"), ("half_extent", "2")]);
    let (o, t) = run_experiment(&cfg)?;
    let s = format!("directional_sum={} (target 4 ± 2%)", summary_value(&o, "directional_sum_d2"));
    Ok(judge(&o, t, Some(Duration::from_secs(5)), s))
}

fn jump_elimination() -> anyhow::Result<Verdict> {
    // The square section alone; the corpus is narrowed to the square.
    let cfg = config(
        Experiment::Continuity,
        &[("continuity.h_list", "1/16, 1/32, 1/64"), ("corpus", "square"), ("grid_h", "1/32")],
    );
    let (o, t) = run_experiment(&cfg)?;
    let mut kept = Outcome::new(&o.experiment);
    kept.checks = o
        .checks
        .iter()
        .filter(|c| c.name.contains("square") && !c.name.contains("quasiball"))
        .cloned()
        .collect();
    let centered = o
        .table("square")
        .and_then(|tb| {
            let (op, h, j) = (tb.col("operator")?, tb.col("h")?, tb.col("jump_length")?);
            tb.rows.iter().find(|r| r[op] == "centered" && r[h] == "0.015625").map(|r| r[j].clone())
        })
        .unwrap_or_else(|| "-".into());
    let s = format!(
        "{} square checks, uncentered jump length 0 required, centered at h=1/64 = {centered} (target 4 ± 5%)",
        kept.checks.len()
    );
    Ok(judge(&kept, t, Some(Duration::from_secs(120)), s))
}

fn block_decrease_preserved() -> anyhow::Result<Verdict> {
    let cfg =
        config(Experiment::Theorem1Sweep, &[("grid_h", "1/32"), ("norms", ALL_NORMS), ("algo", "brute")]);
    let t = Instant::now();
    let report = run_theorem1_sweep(&cfg)?;
    let elapsed = t.elapsed();
    let functions: std::collections::BTreeSet<&str> =
        report.rows.iter().map(|r| r.function.as_str()).collect();
    let violations: usize = report.rows.iter().map(|r| r.bd_violations).sum();
    let n_functions = functions.len();
    let mut o = report.into_outcome();
    save(&cfg, &o);
    o.check("at least 12 corpus functions", n_functions >= 12, format!("{n_functions} functions"));
    let s = format!("{n_functions} functions x 4 norms, {violations} block-decrease violations");
    Ok(judge(&o, elapsed, Some(Duration::from_secs(600)), s))
}

fn variation_ratio_refines() -> anyhow::Result<Verdict> {
    let mut cfg =
        config(Experiment::Theorem1Sweep, &[("grid_h", "1/32"), ("refine_h", "1/64"), ("norms", ALL_NORMS)]);
    cfg.out = out_dir().join("refine");
    let t = Instant::now();
    let report = run_theorem1_sweep(&cfg)?;
    let elapsed = t.elapsed();
    let s = format!(
        "max ratio per spacing {:?}, spread {:?} (tol 15%)",
        report.summary.max_ratio, report.summary.refine_spread
    );
    let o = report.into_outcome();
    save(&cfg, &o);
    Ok(judge(&o, elapsed, None, s))
}

fn counterexample_growth() -> anyhow::Result<Verdict> {
    let cfg = config(Experiment::Counterexample, &[("m_list", "1, 2, 4, 8, 16, 32, 64")]);
    let (o, t) = run_experiment(&cfg)?;
    let v2m = o
        .table("rows")
        .and_then(|tb| {
            let c = tb.col("v2_mf")?;
            Some(tb.rows.iter().map(|r| r[c].clone()).collect::<Vec<_>>().join(" "))
        })
        .unwrap_or_default();
    let s = format!("V_2(M f_m) = {v2m}");
    Ok(judge(&o, t, Some(Duration::from_secs(900)), s))
}

fn quasiball_discontinuity() -> anyhow::Result<Verdict> {
    let cfg = config(
        Experiment::Continuity,
        &[
            ("corpus", "square"),
            ("continuity.h_list", "1/32, 1/64"),
            ("continuity.stable_h", "1/32, 1/64"),
            ("continuity.oracle_h", "1/128"),
        ],
    );
    let mut cfg = cfg;
    cfg.out = out_dir().join("quasiball");
    let (o, t) = run_experiment(&cfg)?;
    let mut kept = Outcome::new(&o.experiment);
    kept.checks = o.checks.iter().filter(|c| c.name.contains("quasiball")).cloned().collect();
    let jumps = o
        .table("quasiball")
        .and_then(|tb| {
            let (h, j) = (tb.col("h")?, tb.col("max_jump")?);
            Some(tb.rows.iter().map(|r| format!("h={} jump={}", r[h], r[j])).collect::<Vec<_>>().join(", "))
        })
        .unwrap_or_default();
    let s = format!("{jumps} (within 20% of the h=1/128 value required)");
    Ok(judge(&kept, t, None, s))
}

fn pruned_matches_brute() -> anyhow::Result<Verdict> {
    let cfg = config(
        Experiment::OracleEquivalence,
        &[("dims", "2, 3"), ("grid_h", "1/8"), ("norms", ALL_NORMS), ("oracle.mutation", "true")],
    );
    let (o, t) = run_experiment(&cfg)?;
    let s = format!(
        "{} cases at h=1/8 in d=2 and d=3, {} mismatching nodes",
        summary_value(&o, "cases"),
        summary_value(&o, "mismatches")
    );
    Ok(judge(&o, t, None, s))
}

fn lipschitz_bounds() -> anyhow::Result<Verdict> {
    let cfg = config(
        Experiment::LipschitzEnk,
        &[
            ("grid_h", "1/32"),
            ("norms", ALL_NORMS),
            ("enk.n", "1, 2, 4"),
            ("enk.k", "0.25, 0.5, 1"),
            ("radius_caps", "0.5, 1"),
        ],
    );
    let (o, t) = run_experiment(&cfg)?;
    let s = format!(
        "{} E_nk and E_Rn sets, {} above their bound",
        summary_value(&o, "sets"),
        summary_value(&o, "failing")
    );
    Ok(judge(&o, t, None, s))
}

fn invariant_suite() -> anyhow::Result<Verdict> {
    let t = Instant::now();
    let o = run_invariant_suite(0x1a2b_3c4d, 96)?;
    let elapsed = t.elapsed();
    let dir = out_dir().join("invariants");
    if let Err(e) = o.write(&dir, &serde_json::json!({ "seed": 0x1a2b_3c4d_u64, "cases": 96 })) {
        eprintln!("warning: could not write {}: {e:#}", dir.display());
    }
    let s = format!("{} checks over 96 seeded cases", o.checks.len());
    Ok(judge(&o, elapsed, Some(Duration::from_secs(300)), s))
}

fn pruned_speedup() -> anyhow::Result<Verdict> {
    let cfg = config(Experiment::Bench, &[("bench.sizes", "65, 129, 257"), ("norms", "linf")]);
    let (o, t) = run_experiment(&cfg)?;
    let s = format!(
        "linf speedup at n=257: {} (required 5, soft target 20 met: {})",
        summary_value(&o, "linf_speedup_largest"),
        summary_value(&o, "soft_target_met")
    );
    Ok(judge(&o, t, None, s))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("square directional variation", square_variation),
        ("jump elimination on the square", jump_elimination),
        ("block decrease preserved", block_decrease_preserved),
        ("variation ratio stable under refinement", variation_ratio_refines),
        ("counterexample partial variation", counterexample_growth),
        ("quasiball discontinuity", quasiball_discontinuity),
        ("pruned kernel equals brute force", pruned_matches_brute),
        ("lipschitz bounds on E_nk and E_Rn", lipschitz_bounds),
        ("invariant suite", invariant_suite),
        ("pruned speedup", pruned_speedup),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        let v = run().unwrap_or_else(|e| Verdict { passed: false, detail: format!("error: {e:#}") });
        let mark = if v.passed { "PASS" } else { "FAIL" };
        println!("{mark} criterion {n}: {name}: {}", v.detail);
        if !v.passed {
            failed.push(n);
        }
    }
    println!(
        "acceptance: {} of {} criteria passed{}",
        criteria.len() - failed.len(),
        criteria.len(),
        if failed.is_empty() { String::new() } else { format!(", failing {failed:?}") }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
