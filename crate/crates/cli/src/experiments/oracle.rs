use anyhow::Context;
use maxreg_core::{generate, maximal_bd_pruned_with, maximal_brute, Grid64, MaxField64, PruneRule};
use rayon::prelude::*;

use super::grid_for;
use crate::config::ExperimentConfig;
use crate::corpus;
use crate::report::{num, Outcome, Table};

/// Node-by-node value differences between two fields on the same grid.
pub(crate) fn mismatches(a: &MaxField64, b: &MaxField64) -> Vec<usize> {
    a.values().iter().zip(b.values()).enumerate().filter(|(_, (x, y))| x != y).map(|(i, _)| i).collect()
}

fn coords(g: &Grid64, flat: usize) -> String {
    g.node_coords(flat).iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

/// Exact value comparison of the pruned kernel against brute force on
/// every corpus member and norm. With `oracle.mutation = true`, a pruned
/// kernel with a frozen axis is run as well and must be caught.
pub fn run_oracle_equivalence(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let mut out = Outcome::new(cfg.experiment.tag());
    out.threshold("max_nodes", cfg.oracle_max_nodes);
    out.threshold("comparison", "exact value equality");

    let h = cfg.grid_h;
    let mut cases = Vec::new();
    for &d in &cfg.dims {
        let g = grid_for(cfg, d, h)?;
        anyhow::ensure!(
            g.len() <= cfg.oracle_max_nodes,
            "oracle-equivalence: grid dim={d} h={h} has {} nodes, above the guard of {}",
            g.len(),
            cfg.oracle_max_nodes
        );
        for (id, spec) in corpus::resolve(cfg, d, &[]) {
            for norm in &cfg.norms {
                cases.push((d, id.clone(), spec.clone(), super::fit_norm(norm, d)));
            }
        }
    }

    let rule = |mutate: bool| {
        if mutate {
            PruneRule::FreezeAxis(0)
        } else {
            PruneRule::Clamp
        }
    };
    let results = cases
        .par_iter()
        .map(|(d, id, spec, norm)| -> anyhow::Result<_> {
            let ctx = || format!("function {id} dim={d} h={h} norm={norm}");
            let g = grid_for(cfg, *d, h)?;
            let f = generate(spec, &g).with_context(ctx)?;
            let brute = maximal_brute(&f, norm, None, cfg.extension).with_context(ctx)?;
            let pruned =
                maximal_bd_pruned_with(&f, norm, None, cfg.extension, rule(false)).with_context(ctx)?;
            let bad = mismatches(&brute, &pruned);
            let mutant = if cfg.oracle_mutation {
                let m =
                    maximal_bd_pruned_with(&f, norm, None, cfg.extension, rule(true)).with_context(ctx)?;
                Some(mismatches(&brute, &m).len())
            } else {
                None
            };
            Ok((*d, id.clone(), norm.clone(), g, brute, pruned, bad, mutant))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut table =
        Table::new("cases", &["function", "dim", "h", "norm", "nodes", "mismatches", "mutant_mismatches"]);
    let mut dump = Table::new(
        "mismatches",
        &[
            "function",
            "dim",
            "h",
            "norm",
            "node",
            "coords",
            "brute_value",
            "brute_center",
            "brute_radius",
            "pruned_value",
            "pruned_center",
            "pruned_radius",
        ],
    );
    let mut total = 0usize;
    let mut mutants_caught = 0usize;
    for (d, id, norm, g, brute, pruned, bad, mutant) in results {
        total += bad.len();
        if mutant.is_some_and(|m| m > 0) {
            mutants_caught += 1;
        }
        table.push(vec![
            id.clone(),
            d.to_string(),
            num(h),
            norm.to_string(),
            g.len().to_string(),
            bad.len().to_string(),
            mutant.map(|m| m.to_string()).unwrap_or_default(),
        ]);
        for &i in &bad {
            let (b, p) = (brute.record(i), pruned.record(i));
            dump.push(vec![
                id.clone(),
                d.to_string(),
                num(h),
                norm.to_string(),
                i.to_string(),
                coords(&g, i),
                num(b.value),
                coords(&g, brute.witness_center_flat(i)),
                num(b.witness_radius),
                num(p.value),
                coords(&g, pruned.witness_center_flat(i)),
                num(p.witness_radius),
            ]);
        }
        if let Some(&i) = bad.first() {
            out.check(
                format!("pruned equals brute {id} {norm} d={d}"),
                false,
                format!("h={h} {} mismatching nodes, first at ({})", bad.len(), coords(&g, i)),
            );
        }
    }
    out.check(
        "pruned kernel matches brute force everywhere",
        total == 0,
        format!("{} cases, {total} mismatching nodes", table.rows.len()),
    );
    if cfg.oracle_mutation {
        out.check(
            "frozen-axis mutant is detected",
            mutants_caught > 0,
            format!("{mutants_caught} of {} cases expose the mutant", table.rows.len()),
        );
    }
    out.summarize("cases", table.rows.len());
    out.summarize("mismatches", total);
    out.tables.push(table);
    out.tables.push(dump);
    Ok(out)
}
