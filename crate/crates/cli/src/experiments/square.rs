use anyhow::Context;
use maxreg_core::{generate, jump_estimate, variation_directional, NormSpec64, ProfileSpec64};

use super::{field_function, grid_for, maximal, timed};
use crate::config::ExperimentConfig;
use crate::report::{num, rel_err, Outcome, Table};

/// Unit cube indicator: its directional variation and jump length should
/// both equal the surface area `2d`, and its `ℓ∞` maximal function should
/// have no jumps.
pub fn run_square_demo(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let mut out = Outcome::new(cfg.experiment.tag());
    out.threshold("variation_rel_tol", cfg.tol.square_variation);
    out.threshold("jump_rel_tol", cfg.tol.square_jump);
    out.threshold("indicator_jump_threshold", 0.5);
    out.threshold("maximal_jump_threshold", cfg.jump_threshold);

    let mut table = Table::new("square", &["dim", "h", "quantity", "value", "target", "rel_err", "pass"]);
    for &d in &cfg.dims {
        let g = grid_for(cfg, d, cfg.grid_h)?;
        let f = generate(&ProfileSpec64::Square { side: 1.0 }, &g)?;
        let area = 2.0 * d as f64;
        let h = cfg.grid_h;

        let v =
            timed(&mut out.timings, format!("variation d={d}"), || variation_directional(&f, cfg.extension));
        let jf = jump_estimate(&f, 0.5)?;
        let mf = timed(&mut out.timings, format!("maximal linf d={d}"), || {
            maximal(&f, &NormSpec64::Linf, None, cfg.extension, false)
        })
        .with_context(|| format!("square d={d} h={h}"))?;
        let jm = jump_estimate(&field_function(&mf)?, cfg.jump_threshold)?;

        let rows = [
            ("directional_sum", v.directional_sum, area, cfg.tol.square_variation),
            ("jump_length", jf.total_length, area, cfg.tol.square_jump),
        ];
        for (q, value, target, tol) in rows {
            let e = rel_err(value, target);
            let pass = e <= tol;
            table.push(vec![
                d.to_string(),
                num(h),
                q.into(),
                num(value),
                num(target),
                num(e),
                pass.to_string(),
            ]);
            out.check(
                format!("square {q} d={d}"),
                pass,
                format!("h={h} value={value} target={target} rel_err={e:.4} tol={tol}"),
            );
        }
        let pass = jm.total_length == 0.0;
        table.push(vec![
            d.to_string(),
            num(h),
            "maximal_jump_length".into(),
            num(jm.total_length),
            num(0.0),
            num(jm.total_length),
            pass.to_string(),
        ]);
        out.check(
            format!("linf maximal of square has no jumps d={d}"),
            pass,
            format!(
                "h={h} norm=linf threshold={} faces={} max_jump={}",
                cfg.jump_threshold,
                jm.faces.len(),
                jm.max_jump()
            ),
        );
        out.summarize(&format!("directional_sum_d{d}"), v.directional_sum);
    }
    out.tables.push(table);
    Ok(out)
}
