//! Structural invariants of the maximal operator and the variation
//! estimates, checked on randomized corpus parameters.

use anyhow::Context;
use maxreg_core::{
    ball_average, generate, radius_ladder, stencil, variation_report, GridFunction64, NormSpec64,
    ProfileSpec64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::random_corpus;
use crate::experiments::{field_function, maximal};
use crate::report::{Check, Outcome, Table};

/// Relative slack for comparisons between separately rounded averages.
pub const ROUNDING_TOL: f64 = 1e-12;
/// Relative slack of the boundary-sum sandwich.
pub const SANDWICH_TOL: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct InvariantCase {
    pub id: String,
    pub spec: ProfileSpec64,
    pub norm: NormSpec64,
    pub dim: usize,
    pub h: f64,
    pub half_extent: f64,
    /// Two radius caps, `caps.0 < caps.1`.
    pub caps: (f64, f64),
    pub lambda: f64,
}

/// `n` cases drawn from `seed`, alternating between `d = 2` and `d = 3`.
pub fn random_cases(seed: u64, n: usize) -> Vec<InvariantCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let specs2 = random_corpus(seed, n, 2);
    let specs3 = random_corpus(seed.wrapping_add(1), n, 3);
    (0..n)
        .map(|i| {
            let dim = if i % 3 == 2 { 3 } else { 2 };
            let (id, spec) = if dim == 2 { specs2[i].clone() } else { specs3[i].clone() };
            let (h, half_extent) = if dim == 2 { (1.0 / 16.0, 1.5) } else { (1.0 / 8.0, 1.0) };
            let norm = match rng.random_range(0..5u32) {
                0 => NormSpec64::Linf,
                1 => NormSpec64::l1(),
                2 => NormSpec64::l2(),
                3 => NormSpec64::Lp { p: rng.random_range(1.2..4.0) },
                _ => {
                    NormSpec64::Rectangle { weights: (0..dim).map(|_| rng.random_range(0.6..1.8)).collect() }
                }
            };
            let r1 = h * rng.random_range(1..4) as f64;
            let r2 = r1 + h * rng.random_range(1..4) as f64;
            InvariantCase {
                id,
                spec,
                norm,
                dim,
                h,
                half_extent,
                caps: (r1, r2),
                lambda: rng.random_range(0.25..4.0),
            }
        })
        .collect()
}

fn rel_le(a: f64, b: f64) -> bool {
    a <= b + ROUNDING_TOL * b.abs().max(1.0)
}

/// Worst violation of `M >= avg_h` and `M >= f - osc_h` over all nodes.
fn dominance(
    f: &GridFunction64,
    m: &GridFunction64,
    norm: &NormSpec64,
    ext: maxreg_core::Extension,
) -> anyhow::Result<Option<String>> {
    let g = f.grid();
    let st = stencil(norm, g.spacing(), g)?;
    let fv = f.values();
    for flat in 0..fv.len() {
        let idx = g.unravel(flat);
        let avg = ball_average(f, &idx, &st, ext)?;
        let mut osc: f64 = 0.0;
        for o in st.offsets() {
            let mut flat_y = 0usize;
            let mut inside = true;
            for (a, &oa) in o.iter().enumerate() {
                let j = idx[a] as i64 + oa;
                if j < 0 || j >= g.counts()[a] as i64 {
                    inside = false;
                    break;
                }
                flat_y += j as usize * g.strides()[a];
            }
            if inside {
                osc = osc.max((fv[flat_y] - fv[flat]).abs());
            }
        }
        let mv = m.values()[flat];
        if !rel_le(avg, mv) || !rel_le(fv[flat] - osc, mv) {
            return Ok(Some(format!(
                "node {:?}: M={mv} avg_h={avg} f={} osc_h={osc}",
                g.node_coords(flat),
                fv[flat]
            )));
        }
    }
    Ok(None)
}

fn first_exceed(a: &[f64], b: &[f64], slack: f64) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| *x > *y + slack * y.abs().max(1.0))
}

/// Runs every invariant on one case.
pub fn check_case(c: &InvariantCase) -> anyhow::Result<Vec<Check>> {
    let ext = maxreg_core::Extension::Constant;
    let g = maxreg_core::Grid64::new(c.dim, &vec![c.half_extent; c.dim], c.h)?;
    let f = generate(&c.spec, &g)?;
    let tag = format!("{} d={} h={} norm={}", c.id, c.dim, c.h, c.norm);
    let mut checks = Vec::new();
    let mut push = |name: &str, failure: Option<String>| {
        let passed = failure.is_none();
        checks.push(Check::new(format!("{name} [{tag}]"), passed, failure.unwrap_or_default()));
    };

    let m = maximal(&f, &c.norm, None, ext, false)?;
    let mg = field_function(&m)?;
    push("dominance", dominance(&f, &mg, &c.norm, ext)?);

    let m1 = maximal(&f, &c.norm, Some(c.caps.0), ext, false)?;
    let m2 = maximal(&f, &c.norm, Some(c.caps.1), ext, false)?;
    let cap_fail = first_exceed(m1.values(), m2.values(), 0.0)
        .map(|i| format!("M_R1 > M_R2 at {:?} (R1={}, R2={})", g.node_coords(i), c.caps.0, c.caps.1))
        .or_else(|| {
            first_exceed(m2.values(), m.values(), 0.0)
                .map(|i| format!("M_R2 > M at {:?} (R2={})", g.node_coords(i), c.caps.1))
        });
    push("cap monotonicity", cap_fail);

    let scaled = maximal(&f.scaled(c.lambda)?, &c.norm, None, ext, false)?;
    let expect: Vec<f64> = m.values().iter().map(|v| v * c.lambda).collect();
    let scale_fail = scaled
        .values()
        .iter()
        .zip(&expect)
        .position(|(a, b)| (a - b).abs() > ROUNDING_TOL * b.abs().max(1.0))
        .map(|i| {
            format!(
                "lambda={} at {:?}: M(lambda f)={} lambda M(f)={}",
                c.lambda,
                g.node_coords(i),
                scaled.values()[i],
                expect[i]
            )
        });
    push("scaling neutrality", scale_fail);

    let ladder = radius_ladder(&g, Some(c.caps.1))?;
    let mut stencil_fail = None;
    let mut prev: Option<maxreg_core::BallStencil<f64>> = None;
    for r in ladder {
        let st = stencil(&c.norm, r, &g)?;
        if let Some(p) = &prev {
            if let Some(o) = p.offsets().find(|o| !st.contains(o)) {
                stencil_fail.get_or_insert(format!("offset {o:?} of radius {} missing at {r}", p.radius()));
            }
        }
        prev = Some(st);
    }
    push("stencil monotonicity", stencil_fail);

    let st = prev.expect("ladder is nonempty");
    let reflect_fail = st.offsets().find_map(|o| {
        (0..o.len()).find_map(|a| {
            let mut q = o.to_vec();
            q[a] = -q[a];
            (!st.contains(&q)).then(|| format!("offset {o:?} reflected on axis {a} is missing"))
        })
    });
    push("reflection closure", reflect_fail);

    let sqrt_d = (c.dim as f64).sqrt();
    let mut sandwich_fail = None;
    for (what, gf) in [("f", &f), ("Mf", &mg)] {
        let v = variation_report(gf, ext);
        if !(v.v_lower <= v.v_upper) {
            sandwich_fail.get_or_insert(format!("{what}: v_lower {} > v_upper {}", v.v_lower, v.v_upper));
        }
        if let Some(s) = v.bd_boundary_sum {
            let sum = v.directional_sum;
            let lo = sum / sqrt_d * (1.0 - SANDWICH_TOL);
            let hi = sqrt_d * sum * (1.0 + SANDWICH_TOL);
            if s < lo - 1e-12 || s > hi + 1e-12 {
                sandwich_fail.get_or_insert(format!("{what}: S={s} outside [{lo}, {hi}]"));
            }
        }
    }
    push("variation sandwich", sandwich_fail);
    Ok(checks)
}

/// Runs [`check_case`] over [`random_cases`] and folds the results in case order.
pub fn run_invariant_suite(seed: u64, n: usize) -> anyhow::Result<Outcome> {
    let cases = random_cases(seed, n);
    let per_case = cases
        .par_iter()
        .map(|c| check_case(c).with_context(|| format!("invariant case {} ({:?})", c.id, c.spec)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut out = Outcome::new("invariants");
    out.threshold("seed", seed);
    out.threshold("rounding_rel_tol", ROUNDING_TOL);
    out.threshold("sandwich_rel_tol", SANDWICH_TOL);
    let mut table = Table::new("invariants", &["case", "check", "passed", "detail"]);
    for (c, checks) in cases.iter().zip(per_case) {
        for ch in checks {
            table.push(vec![c.id.clone(), ch.name.clone(), ch.passed.to_string(), ch.detail.clone()]);
            out.checks.push(ch);
        }
    }
    out.tables.push(table);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_are_reproducible() {
        let a = random_cases(3, 6);
        let b = random_cases(3, 6);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.spec, y.spec);
            assert_eq!(x.norm, y.norm);
            assert_eq!(x.lambda, y.lambda);
            assert!(x.caps.0 < x.caps.1);
        }
    }

    #[test]
    fn a_small_suite_passes() {
        let out = run_invariant_suite(5, 3).unwrap();
        for c in &out.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
