use anyhow::Context;
use maxreg_core::{
    generate, jump_estimate, max_jump_near, maximal_centered, Grid64, NormSpec64, ProfileSpec64,
};
use rayon::prelude::*;

use super::{field_function, grid_for, maximal, timed};
use crate::config::ExperimentConfig;
use crate::corpus::{self, is_indicator};
use crate::report::{num, rel_err, Outcome, Table};

const QUASIBALL: ProfileSpec64 = ProfileSpec64::QuasiBall { p: 0.5, radius: 1.0 };

/// Jump length of each corpus function against that of its maximal
/// function, the square's jump-free image under `ℓ∞` next to its centered
/// counterpart, and the persistent jump of the quasiball image at `(1, 0)`.
pub fn run_continuity(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let mut out = Outcome::new(cfg.experiment.tag());
    out.threshold("indicator_jump_threshold", cfg.jump_threshold);
    out.threshold("smooth_jump_threshold", "10h");
    out.threshold("maximal_to_input_jump_ratio", cfg.tol.continuity);
    out.threshold("centered_square_rel_tol", cfg.tol.centered_jump);
    out.threshold("quasiball_rel_tol", cfg.tol.quasiball);
    out.threshold("quasiball_oracle_h", cfg.oracle_h);

    corpus_section(cfg, &mut out)?;
    square_section(cfg, &mut out)?;
    if cfg.dims.contains(&2) {
        quasiball_section(cfg, &mut out)?;
    }
    Ok(out)
}

fn corpus_section(cfg: &ExperimentConfig, out: &mut Outcome) -> anyhow::Result<()> {
    let h = cfg.grid_h;
    let mut cases = Vec::new();
    for &d in &cfg.dims {
        for (id, spec) in corpus::resolve(cfg, d, &[]) {
            for norm in &cfg.norms {
                cases.push((d, id.clone(), spec.clone(), super::fit_norm(norm, d)));
            }
        }
    }
    let rows = cases
        .par_iter()
        .map(|(d, id, spec, norm)| -> anyhow::Result<_> {
            let ctx = || format!("function {id} dim={d} h={h} norm={norm}");
            let g = grid_for(cfg, *d, h)?;
            let f = generate(spec, &g).with_context(ctx)?;
            let thr = if is_indicator(spec) { cfg.jump_threshold } else { 10.0 * h };
            let mf = maximal(&f, norm, None, cfg.extension, false).with_context(ctx)?;
            let jf = jump_estimate(&f, thr)?;
            let jm = jump_estimate(&field_function(&mf)?, thr)?;
            Ok((*d, id.clone(), norm.clone(), thr, jf, jm))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut table = Table::new(
        "jumps",
        &["function", "dim", "h", "norm", "threshold", "jump_f", "jump_mf", "max_jump_mf", "pass"],
    );
    for (d, id, norm, thr, jf, jm) in rows {
        let pass = if jf.total_length > 0.0 {
            jm.total_length <= cfg.tol.continuity * jf.total_length
        } else {
            true
        };
        let pass = pass && !(id == "square" && norm == NormSpec64::Linf && jm.total_length != 0.0);
        if !pass {
            let node = jm.faces.first().map(|f| f.node).unwrap_or(0);
            out.check(
                format!("jump reduction {id} {norm}"),
                false,
                format!(
                    "dim={d} h={h} threshold={thr} jump_f={} jump_mf={} first face node={node}",
                    jf.total_length, jm.total_length
                ),
            );
        }
        table.push(vec![
            id,
            d.to_string(),
            num(h),
            norm.to_string(),
            num(thr),
            num(jf.total_length),
            num(jm.total_length),
            num(jm.max_jump()),
            pass.to_string(),
        ]);
    }
    let failing = table.rows.iter().filter(|r| r[8] == "false").count();
    out.check(
        "maximal functions shed the input's jumps",
        failing == 0,
        format!("{} cases, {failing} failing", table.rows.len()),
    );
    out.tables.push(table);
    Ok(())
}

fn square_section(cfg: &ExperimentConfig, out: &mut Outcome) -> anyhow::Result<()> {
    let mut table = Table::new("square", &["dim", "h", "operator", "jump_length", "target", "pass"]);
    let finest = cfg.continuity_h.iter().copied().fold(f64::INFINITY, f64::min);
    for &d in &cfg.dims {
        let area = 2.0 * d as f64;
        for &h in &cfg.continuity_h {
            let g = grid_for(cfg, d, h)?;
            let f = generate(&ProfileSpec64::Square { side: 1.0 }, &g)?;
            let mf = timed(&mut out.timings, format!("square uncentered d={d} h={h}"), || {
                maximal(&f, &NormSpec64::Linf, None, cfg.extension, false)
            })?;
            let ju = jump_estimate(&field_function(&mf)?, cfg.jump_threshold)?;
            let pass = ju.total_length == 0.0;
            out.check(
                format!("uncentered linf square jump-free d={d} h={h}"),
                pass,
                format!("norm=linf threshold={} jump_length={}", cfg.jump_threshold, ju.total_length),
            );
            table.push(vec![
                d.to_string(),
                num(h),
                "uncentered".into(),
                num(ju.total_length),
                num(0.0),
                pass.to_string(),
            ]);

            let mc = timed(&mut out.timings, format!("square centered d={d} h={h}"), || {
                maximal_centered(&f, &NormSpec64::Linf, None, cfg.extension)
            })?;
            let jc = jump_estimate(&field_function(&mc)?, cfg.jump_threshold)?;
            let e = rel_err(jc.total_length, area);
            let checked = h == finest;
            let pass = !checked || e <= cfg.tol.centered_jump;
            if checked {
                out.check(
                    format!("centered linf square keeps its jumps d={d} h={h}"),
                    pass,
                    format!("jump_length={} target={area} rel_err={e:.4}", jc.total_length),
                );
            }
            table.push(vec![
                d.to_string(),
                num(h),
                "centered".into(),
                num(jc.total_length),
                num(area),
                pass.to_string(),
            ]);
        }
    }
    out.tables.push(table);
    Ok(())
}

/// Largest adjacent jump of `M_∞ χ_quasiball` within one spacing of `(1, 0)`.
pub(crate) fn quasiball_jump(cfg: &ExperimentConfig, h: f64) -> anyhow::Result<f64> {
    let e = cfg.half_extent_for(2);
    let g = Grid64::new(2, &e, h)?;
    let f = generate(&QUASIBALL, &g)?;
    let mf = maximal(&f, &NormSpec64::Linf, None, cfg.extension, false)
        .with_context(|| format!("quasiball h={h}"))?;
    Ok(max_jump_near(&field_function(&mf)?, &[1.0, 0.0], h))
}

fn quasiball_section(cfg: &ExperimentConfig, out: &mut Outcome) -> anyhow::Result<()> {
    let delta0 = timed(&mut out.timings, format!("quasiball oracle h={}", cfg.oracle_h), || {
        quasiball_jump(cfg, cfg.oracle_h)
    })?;
    out.summarize("quasiball_delta0", delta0);
    let mut table = Table::new("quasiball", &["h", "max_jump", "delta0", "rel_err", "persists", "stable"]);
    table.push(vec![num(cfg.oracle_h), num(delta0), num(delta0), num(0.0), "true".into(), "true".into()]);
    out.check(
        "quasiball oracle jump is nonzero",
        delta0 > 0.0,
        format!("h={} delta0={delta0}", cfg.oracle_h),
    );
    for &h in &cfg.continuity_h {
        let j = timed(&mut out.timings, format!("quasiball h={h}"), || quasiball_jump(cfg, h))?;
        let e = rel_err(j, delta0);
        let persists = j >= delta0;
        out.check(
            format!("quasiball jump persists h={h}"),
            persists,
            format!("norm=linf point=(1,0) max_jump={j} delta0={delta0}"),
        );
        let stable = !cfg.stable_h.contains(&h) || e <= cfg.tol.quasiball;
        if cfg.stable_h.contains(&h) {
            out.check(
                format!("quasiball jump matches oracle h={h}"),
                stable,
                format!(
                    "norm=linf point=(1,0) max_jump={j} delta0={delta0} rel_err={e:.4} tol={}",
                    cfg.tol.quasiball
                ),
            );
        }
        table.push(vec![num(h), num(j), num(delta0), num(e), persists.to_string(), stable.to_string()]);
    }
    out.tables.push(table);
    Ok(())
}
