use anyhow::Context;
use maxreg_core::{enk_classify, generate, variation_report, MaxField64};
use rayon::prelude::*;

use super::{grid_for, maximal};
use crate::config::ExperimentConfig;
use crate::corpus;
use crate::report::{num, Outcome, Table};

const DEFAULT_IDS: [&str; 5] = ["square", "square-wide", "exp-l2", "exp-linf", "exp-rect"];

/// Largest `|ΔM|/h` over adjacent node pairs with both ends in `mask`,
/// the number of such pairs, and the flat index of the worst pair's first node.
pub(crate) fn max_quotient(mf: &MaxField64, mask: &[bool]) -> (f64, usize, usize) {
    let g = mf.grid();
    let h = g.spacing();
    let v = mf.values();
    let mut best = (0.0, 0usize, 0usize);
    for flat in 0..v.len() {
        if !mask[flat] {
            continue;
        }
        let idx = g.unravel(flat);
        for (axis, &s) in g.strides().iter().enumerate() {
            if idx[axis] + 1 < g.counts()[axis] && mask[flat + s] {
                best.1 += 1;
                let q = (v[flat + s] - v[flat]).abs() / h;
                if q > best.0 {
                    best.0 = q;
                    best.2 = flat;
                }
            }
        }
    }
    best
}

/// Lipschitz quotients of the maximal function restricted to the discrete
/// `E_{n,k}` sets (bound `c·d·k·n`) and, for each radius cap `R`, of the
/// local maximal function on `E_{R,n}` (bound `n^d·V(f)/|B(0,1)|`).
pub fn run_lipschitz_enk(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let mut out = Outcome::new(cfg.experiment.tag());
    out.threshold("enk_bound", "c_mu * d * k * n");
    out.threshold("ern_bound", "n^d * V_upper(f) / |B(0,1)|");
    out.threshold("n", &cfg.enk_n);
    out.threshold("k", &cfg.enk_k);
    out.threshold("radius_caps", &cfg.radius_caps);

    let mut cases = Vec::new();
    for &d in &cfg.dims {
        for (id, spec) in corpus::resolve(cfg, d, &DEFAULT_IDS) {
            for norm in &cfg.norms {
                cases.push((d, id.clone(), spec.clone(), super::fit_norm(norm, d)));
            }
        }
    }
    let h = cfg.grid_h;
    let results = cases
        .par_iter()
        .map(|(d, id, spec, norm)| -> anyhow::Result<Vec<Vec<String>>> {
            let ctx = || format!("function {id} dim={d} h={h} norm={norm}");
            let g = grid_for(cfg, *d, h)?;
            let f = generate(spec, &g).with_context(ctx)?;
            let mut rows = Vec::new();
            let mf = maximal(&f, norm, None, cfg.extension, false).with_context(ctx)?;
            let c_mu = norm.l2_domination_constant(*d);
            for &n in &cfg.enk_n {
                for &k in &cfg.enk_k {
                    let mask = enk_classify(&mf, n, k);
                    let (q, pairs, node) = max_quotient(&mf, &mask);
                    let bound = c_mu * *d as f64 * k * n as f64;
                    rows.push(row(id, *d, h, norm, "E_nk", n, num(k), pairs, q, bound, node, &g));
                }
            }
            let vf = variation_report(&f, cfg.extension).v_upper;
            let vol = norm.unit_ball_volume(*d);
            for &cap in &cfg.radius_caps {
                let mr = maximal(&f, norm, Some(cap), cfg.extension, false).with_context(ctx)?;
                for &n in &cfg.enk_n {
                    let mask = enk_classify(&mr, n, f64::INFINITY);
                    let (q, pairs, node) = max_quotient(&mr, &mask);
                    let bound = (n as f64).powi(*d as i32) * vf / vol;
                    let set = format!("E_Rn R={cap}");
                    rows.push(row(id, *d, h, norm, &set, n, "inf".into(), pairs, q, bound, node, &g));
                }
            }
            Ok(rows)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut table = Table::new(
        "quotients",
        &[
            "function",
            "dim",
            "h",
            "norm",
            "set",
            "n",
            "k",
            "pairs",
            "max_quotient",
            "bound",
            "worst_node",
            "pass",
        ],
    );
    for r in results.into_iter().flatten() {
        if r[11] == "false" {
            out.check(
                format!("lipschitz {} {} {} n={} k={}", r[0], r[3], r[4], r[5], r[6]),
                false,
                format!("dim={} h={} quotient={} bound={} node={}", r[1], r[2], r[8], r[9], r[10]),
            );
        }
        table.push(r);
    }
    let failing = table.rows.iter().filter(|r| r[11] == "false").count();
    let empty = table.rows.iter().filter(|r| r[7] == "0").count();
    out.check(
        "all quotients within their Lipschitz bounds",
        failing == 0,
        format!("{} sets, {failing} failing, {empty} without adjacent pairs", table.rows.len()),
    );
    out.summarize("sets", table.rows.len());
    out.summarize("failing", failing);
    out.tables.push(table);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn row(
    id: &str,
    d: usize,
    h: f64,
    norm: &maxreg_core::NormSpec64,
    set: &str,
    n: u32,
    k: String,
    pairs: usize,
    q: f64,
    bound: f64,
    node: usize,
    g: &maxreg_core::Grid64,
) -> Vec<String> {
    let coords = g.node_coords(node).iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
    vec![
        id.to_string(),
        d.to_string(),
        num(h),
        norm.to_string(),
        set.to_string(),
        n.to_string(),
        k,
        pairs.to_string(),
        num(q),
        num(bound),
        if pairs > 0 { coords } else { String::new() },
        (q <= bound).to_string(),
    ]
}
