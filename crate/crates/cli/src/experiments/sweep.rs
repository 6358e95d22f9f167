use std::time::Instant;

use anyhow::Context;
use maxreg_core::{check_block_decreasing, generate, variation_of_field, variation_report};
use rayon::prelude::*;
use serde::Serialize;

use super::{cap_label, grid_for, maximal};
use crate::config::ExperimentConfig;
use crate::corpus;
use crate::report::{num, opt_num, Outcome, Table, Timing};

/// One (function, norm, cap, spacing) case of the variation sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub function: String,
    pub dim: usize,
    pub h: f64,
    pub norm: String,
    pub radius_cap: Option<f64>,
    pub vf_lower: f64,
    pub vf_upper: f64,
    pub vmf_lower: f64,
    pub vmf_upper: f64,
    /// `vmf_upper / vf_lower`; `None` when both variations vanish.
    pub ratio: Option<f64>,
    pub bd_violations: usize,
    pub pass: bool,
    #[serde(skip)]
    pub runtime_s: f64,
}

impl SweepRow {
    pub fn ratio_label(&self) -> String {
        match self.ratio {
            Some(r) => num(r),
            None => "degenerate".into(),
        }
    }

    /// Recomputes `pass` from the other fields.
    pub fn derive_pass(&self) -> bool {
        let ratio_ok = match self.ratio {
            Some(r) => r.is_finite(),
            None => self.vf_lower == 0.0 && self.vmf_upper == 0.0,
        };
        ratio_ok && self.bd_violations == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    /// Largest finite ratio per spacing, in configured order.
    pub max_ratio: Vec<(f64, f64)>,
    pub violations: usize,
    /// Relative spread of the max ratios between the two spacings.
    pub refine_spread: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub experiment: String,
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
    pub refine_tol: f64,
}

fn ratio(vmf_upper: f64, vf_lower: f64) -> Option<f64> {
    if vf_lower == 0.0 {
        if vmf_upper == 0.0 {
            None
        } else {
            Some(f64::INFINITY)
        }
    } else {
        Some(vmf_upper / vf_lower)
    }
}

/// Variation of `f` and of its maximal functions across corpus, norms and
/// radius caps, with a block-decreasing check on every output.
pub fn run_theorem1_sweep(cfg: &ExperimentConfig) -> anyhow::Result<TheoremReport> {
    let mut spacings = vec![cfg.grid_h];
    spacings.extend(cfg.refine_h);
    let mut caps: Vec<Option<f64>> = vec![None];
    caps.extend(cfg.radius_caps.iter().map(|c| Some(*c)));

    let mut cases = Vec::new();
    for &h in &spacings {
        for &d in &cfg.dims {
            for (id, spec) in corpus::resolve(cfg, d, &[]) {
                for norm in &cfg.norms {
                    for &cap in &caps {
                        cases.push((h, d, id.clone(), spec.clone(), super::fit_norm(norm, d), cap));
                    }
                }
            }
        }
    }
    anyhow::ensure!(!cases.is_empty(), "theorem1-sweep: empty corpus");

    let rows = cases
        .par_iter()
        .map(|(h, d, id, spec, norm, cap)| -> anyhow::Result<SweepRow> {
            let ctx = || format!("function {id} dim={d} h={h} norm={norm} cap={}", cap_label(*cap));
            let t = Instant::now();
            let g = grid_for(cfg, *d, *h)?;
            let f = generate(spec, &g).with_context(ctx)?;
            let mf = maximal(&f, norm, *cap, cfg.extension, cfg.brute).with_context(ctx)?;
            let vf = variation_report(&f, cfg.extension);
            let vm = variation_of_field(&mf, cfg.extension).with_context(ctx)?;
            let bd = check_block_decreasing(&super::field_function(&mf)?);
            let mut row = SweepRow {
                function: id.clone(),
                dim: *d,
                h: *h,
                norm: norm.to_string(),
                radius_cap: *cap,
                vf_lower: vf.v_lower,
                vf_upper: vf.v_upper,
                vmf_lower: vm.v_lower,
                vmf_upper: vm.v_upper,
                ratio: ratio(vm.v_upper, vf.v_lower),
                bd_violations: bd.total,
                pass: false,
                runtime_s: t.elapsed().as_secs_f64(),
            };
            row.pass = row.derive_pass();
            Ok(row)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let max_ratio: Vec<(f64, f64)> = spacings
        .iter()
        .map(|&h| {
            let m = rows
                .iter()
                .filter(|r| r.h == h)
                .filter_map(|r| r.ratio)
                .filter(|r| r.is_finite())
                .fold(0.0, f64::max);
            (h, m)
        })
        .collect();
    let refine_spread = (max_ratio.len() == 2).then(|| {
        let (a, b) = (max_ratio[0].1, max_ratio[1].1);
        (a - b).abs() / a.max(b)
    });
    Ok(TheoremReport {
        experiment: cfg.experiment.tag().into(),
        summary: SweepSummary {
            max_ratio,
            violations: rows.iter().filter(|r| !r.pass).count(),
            refine_spread,
        },
        rows,
        refine_tol: cfg.tol.refine,
    })
}

impl TheoremReport {
    pub fn into_outcome(self) -> Outcome {
        let mut out = Outcome::new(&self.experiment);
        out.threshold("ratio", "finite, or degenerate when both variations vanish");
        out.threshold("bd_violations", 0);
        if self.summary.refine_spread.is_some() {
            out.threshold("refine_rel_tol", self.refine_tol);
        }
        let mut table = Table::new(
            "rows",
            &[
                "function",
                "dim",
                "h",
                "norm",
                "radius_cap",
                "vf_lower",
                "vf_upper",
                "vmf_lower",
                "vmf_upper",
                "ratio",
                "bd_violations",
                "pass",
            ],
        );
        for r in &self.rows {
            table.push(vec![
                r.function.clone(),
                r.dim.to_string(),
                num(r.h),
                r.norm.clone(),
                opt_num(r.radius_cap),
                num(r.vf_lower),
                num(r.vf_upper),
                num(r.vmf_lower),
                num(r.vmf_upper),
                r.ratio_label(),
                r.bd_violations.to_string(),
                r.pass.to_string(),
            ]);
            out.timings.push(Timing {
                label: format!(
                    "{} d={} h={} {} cap={}",
                    r.function,
                    r.dim,
                    r.h,
                    r.norm,
                    cap_label(r.radius_cap)
                ),
                seconds: r.runtime_s,
            });
            if !r.pass {
                out.check(
                    format!("row {} {}", r.function, r.norm),
                    false,
                    format!(
                        "dim={} h={} cap={} ratio={} bd_violations={}",
                        r.dim,
                        r.h,
                        cap_label(r.radius_cap),
                        r.ratio_label(),
                        r.bd_violations
                    ),
                );
            }
        }
        let bad = self.summary.violations;
        out.check(
            "all ratios finite and all maximal functions block decreasing",
            bad == 0,
            format!("{} rows, {bad} failing", self.rows.len()),
        );
        if let Some(spread) = self.summary.refine_spread {
            out.check(
                "max ratio stable under refinement",
                spread <= self.refine_tol,
                format!("max ratios {:?} spread={spread:.4} tol={}", self.summary.max_ratio, self.refine_tol),
            );
        }
        out.summarize("max_ratio", &self.summary.max_ratio);
        out.summarize("violations", bad);
        out.summarize("refine_spread", self.summary.refine_spread);
        out.tables.push(table);
        out
    }
}
