use anyhow::Context;
use maxreg_core::{generate, partial_variation, Grid64, NormSpec64, ProfileSpec64};

use super::{field_function, maximal, timed};
use crate::config::{ExperimentConfig, Growth};
use crate::report::{num, opt_num, rel_err, Outcome, Table};

/// Second partial variation of `f_m(x) = m·g(m|x_1|)·g(|x_2|)` and of its
/// `ℓ∞` maximal function for each `m` in the list. The first stays at 4
/// while the second must keep growing.
pub fn run_counterexample(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let p = &cfg.counterexample;
    let mut out = Outcome::new(cfg.experiment.tag());
    out.threshold("v2_f_target", 4.0);
    out.threshold("v2_f_rel_tol", p.v2_tol);
    out.threshold("min_relative_increase", p.min_increase);
    out.threshold("spacing_rule", format!("min({}, {}/m)", p.h_max, p.h_per_m));
    out.threshold(
        "half_extent_rule",
        match p.growth {
            Growth::Fixed => format!("{}", p.half_extent),
            Growth::Sqrt => format!("{}·sqrt(m)", p.half_extent),
        },
    );
    out.threshold("profile", &p.g);

    let mut table =
        Table::new("rows", &["m", "h", "half_extent", "nodes", "v2_f", "v2_mf", "growth", "pass"]);
    let mut prev: Option<(u32, f64)> = None;
    for &m in &p.m_list {
        let h = p.h_max.min(p.h_per_m / m as f64);
        let e = match p.growth {
            Growth::Fixed => p.half_extent,
            Growth::Sqrt => p.half_extent * (m as f64).sqrt(),
        };
        // Snap the extent to the grid so counts stay odd and symmetric.
        let e = (e / h).round() * h;
        let g = Grid64::new(2, &[e, e], h)?;
        let spec = ProfileSpec64::Separable { m, g: p.g.clone() };
        let f = generate(&spec, &g).with_context(|| format!("f_m m={m} h={h} half_extent={e}"))?;
        let v2f = partial_variation(&f, 1, cfg.extension)?;
        let mf = timed(&mut out.timings, format!("maximal m={m}"), || {
            maximal(&f, &NormSpec64::Linf, None, cfg.extension, false)
        })
        .with_context(|| format!("maximal of f_m m={m} h={h}"))?;
        let v2m = partial_variation(&field_function(&mf)?, 1, cfg.extension)?;

        let err = rel_err(v2f, 4.0);
        let v_ok = err <= p.v2_tol;
        out.check(
            format!("V_2(f_m) = 4 at m={m}"),
            v_ok,
            format!("h={h} half_extent={e} value={v2f} rel_err={err:.4}"),
        );
        let growth = prev.map(|(_, v)| v2m / v - 1.0);
        let grow_ok = growth.is_none_or(|gr| gr >= p.min_increase);
        if let Some((pm, pv)) = prev {
            out.check(
                format!("V_2(M f_m) grows from m={pm} to m={m}"),
                grow_ok,
                format!("{pv} -> {v2m} relative increase {:.4}", growth.unwrap_or(0.0)),
            );
        }
        table.push(vec![
            m.to_string(),
            num(h),
            num(e),
            g.len().to_string(),
            num(v2f),
            num(v2m),
            opt_num(growth),
            (v_ok && grow_ok).to_string(),
        ]);
        prev = Some((m, v2m));
    }
    out.tables.push(table);
    Ok(out)
}
