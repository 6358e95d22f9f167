//! Property tests over randomized profiles, norms and spacings. The RNG is
//! seeded, so every run sees the same cases.

use maxreg_core::{
    ball_average, check_block_decreasing, generate, maximal_bd_pruned, maximal_brute, mu, read_csv, stencil,
    variation_report, write_csv, Extension, Grid64, GridFunction64, NormSpec64, Profile1d, ProfileSpec64,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(0x6d61_7872), failure_persistence: None, ..Config::default() }
}

fn norm_strategy(dim: usize) -> impl Strategy<Value = NormSpec64> {
    prop_oneof![
        Just(NormSpec64::Linf),
        Just(NormSpec64::l1()),
        Just(NormSpec64::l2()),
        (1.1f64..5.0).prop_map(|p| NormSpec64::Lp { p }),
        proptest::collection::vec(0.5f64..2.0, dim).prop_map(|weights| NormSpec64::Rectangle { weights }),
    ]
}

fn shape_strategy() -> impl Strategy<Value = Profile1d<f64>> {
    prop_oneof![
        (0.3f64..3.0).prop_map(|rate| Profile1d::Exp { rate }),
        (0.2f64..0.9).prop_map(|sigma| Profile1d::Gaussian { sigma }),
        (0.4f64..1.8).prop_map(|width| Profile1d::Tent { width }),
        (0.2f64..1.2).prop_map(|radius| Profile1d::Step { radius }),
    ]
}

fn profile_strategy(dim: usize) -> impl Strategy<Value = ProfileSpec64> {
    prop_oneof![
        (0.3f64..1.8).prop_map(|side| ProfileSpec64::Square { side }),
        (0.3f64..1.0, 0.4f64..1.3).prop_map(|(p, radius)| ProfileSpec64::QuasiBall { p, radius }),
        (norm_strategy(dim), shape_strategy())
            .prop_map(|(norm, profile)| ProfileSpec64::Radial { norm, profile }),
    ]
}

fn small_grid(dim: usize) -> Grid64 {
    match dim {
        1 => Grid64::new(1, &[2.0], 1.0 / 16.0).unwrap(),
        2 => Grid64::new(2, &[1.25, 1.25], 1.0 / 8.0).unwrap(),
        _ => Grid64::new(3, &[0.75, 0.75, 0.75], 0.25).unwrap(),
    }
}

/// Average over the ball at `center`, by direct enumeration of every grid
/// offset against the norm. Shares no code with the library's stencils.
fn oracle_average(
    f: &GridFunction64,
    norm: &NormSpec64,
    center: &[usize],
    radius: f64,
    ext: Extension,
) -> f64 {
    let g = f.grid();
    let d = g.dim();
    let h = g.spacing();
    let reach = (radius / h).ceil() as i64 * 3;
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut o = vec![-reach; d];
    loop {
        let x: Vec<f64> = o.iter().map(|&v| v as f64 * h).collect();
        if mu(norm, &x).unwrap() <= radius * (1.0 + 1e-12) {
            count += 1;
            let mut idx = Vec::with_capacity(d);
            let mut inside = true;
            for a in 0..d {
                let j = center[a] as i64 + o[a];
                if j < 0 || j >= g.counts()[a] as i64 {
                    inside = false;
                }
                idx.push(j.clamp(0, g.counts()[a] as i64 - 1) as usize);
            }
            if inside || ext == Extension::Constant {
                sum += f.values()[g.ravel(&idx)];
            }
        }
        let mut a = d;
        loop {
            if a == 0 {
                return sum / count as f64;
            }
            a -= 1;
            o[a] += 1;
            if o[a] <= reach {
                break;
            }
            o[a] = -reach;
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn witnesses_reproduce_values_and_contain_their_node(
        (dim, spec, norm) in (1usize..=2).prop_flat_map(|d| (Just(d), profile_strategy(d), norm_strategy(d))),
        zero in any::<bool>(),
    ) {
        let ext = if zero { Extension::Zero } else { Extension::Constant };
        let g = small_grid(dim);
        let f = generate(&spec, &g).unwrap();
        let m = maximal_brute(&f, &norm, None, ext).unwrap();
        for i in (0..m.len()).step_by(7) {
            let rec = m.record(i);
            let direct = oracle_average(&f, &norm, &rec.witness_center, rec.witness_radius, ext);
            prop_assert!((direct - rec.value).abs() <= 1e-12 * direct.abs().max(1.0),
                "node {:?}: record {} oracle {}", rec.node, rec.value, direct);
            let off: Vec<f64> = rec.node.iter().zip(&rec.witness_center)
                .map(|(a, b)| (*a as f64 - *b as f64) * g.spacing()).collect();
            prop_assert!(mu(&norm, &off).unwrap() <= rec.witness_radius * (1.0 + 1e-12));
        }
    }

    #[test]
    fn pruned_and_brute_agree_and_preserve_block_decrease(
        spec in profile_strategy(2),
        norm in norm_strategy(2),
        cap_steps in proptest::option::of(1usize..6),
    ) {
        let g = small_grid(2);
        let f = generate(&spec, &g).unwrap();
        prop_assert!(check_block_decreasing(&f).passed());
        let cap = cap_steps.map(|k| k as f64 * g.spacing());
        let b = maximal_brute(&f, &norm, cap, Extension::Constant).unwrap();
        let p = maximal_bd_pruned(&f, &norm, cap, Extension::Constant).unwrap();
        prop_assert_eq!(b.values(), p.values());
        let bf = b.to_grid_function(1.0).unwrap();
        prop_assert!(check_block_decreasing(&bf).passed());
    }

    #[test]
    fn cap_monotone_and_scaling_neutral(
        spec in profile_strategy(2),
        norm in norm_strategy(2),
        r1 in 1usize..4,
        extra in 1usize..4,
        lambda in 0.1f64..10.0,
    ) {
        let g = small_grid(2);
        let h = g.spacing();
        let f = generate(&spec, &g).unwrap();
        let m1 = maximal_brute(&f, &norm, Some(r1 as f64 * h), Extension::Constant).unwrap();
        let m2 = maximal_brute(&f, &norm, Some((r1 + extra) as f64 * h), Extension::Constant).unwrap();
        let m = maximal_brute(&f, &norm, None, Extension::Constant).unwrap();
        for i in 0..m.len() {
            prop_assert!(m1.values()[i] <= m2.values()[i]);
            prop_assert!(m2.values()[i] <= m.values()[i]);
        }
        let ms = maximal_brute(&f.scaled(lambda).unwrap(), &norm, None, Extension::Constant).unwrap();
        for i in 0..m.len() {
            let want = lambda * m.values()[i];
            prop_assert!((ms.values()[i] - want).abs() <= 1e-12 * want.max(1.0));
        }
        // Dyadic factors commute with the rounding exactly.
        let m2x = maximal_brute(&f.scaled(2.0).unwrap(), &norm, None, Extension::Constant).unwrap();
        for i in 0..m.len() {
            prop_assert_eq!(m2x.values()[i], 2.0 * m.values()[i]);
        }
    }

    #[test]
    fn dominance_up_to_local_oscillation(spec in profile_strategy(2), norm in norm_strategy(2)) {
        let g = small_grid(2);
        let f = generate(&spec, &g).unwrap();
        let m = maximal_brute(&f, &norm, None, Extension::Constant).unwrap();
        let st = stencil(&norm, g.spacing(), &g).unwrap();
        for i in 0..g.len() {
            let idx = g.unravel(i);
            let avg = ball_average(&f, &idx, &st, Extension::Constant).unwrap();
            prop_assert!(avg <= m.values()[i] + 1e-12);
            let mut osc: f64 = 0.0;
            for o in st.offsets() {
                let j: Vec<i64> = idx.iter().zip(o).map(|(a, b)| *a as i64 + b).collect();
                if j.iter().zip(g.counts()).all(|(v, c)| *v >= 0 && *v < *c as i64) {
                    let ju: Vec<usize> = j.iter().map(|v| *v as usize).collect();
                    osc = osc.max((f.values()[g.ravel(&ju)] - f.values()[i]).abs());
                }
            }
            prop_assert!(f.values()[i] - osc <= m.values()[i] + 1e-12);
        }
    }

    #[test]
    fn stencils_grow_and_reflect(norm in norm_strategy(3), k in 1usize..4) {
        let g = Grid64::new(3, &[2.0, 2.0, 2.0], 0.25).unwrap();
        let h = g.spacing();
        let small = stencil(&norm, k as f64 * h, &g).unwrap();
        let big = stencil(&norm, (k + 1) as f64 * h, &g).unwrap();
        for o in small.offsets() {
            prop_assert!(big.contains(o));
            for a in 0..3 {
                let mut r = o.to_vec();
                r[a] = -r[a];
                prop_assert!(small.contains(&r));
            }
        }
        prop_assert!(small.contains(&[0, 0, 0]));
    }

    #[test]
    fn variation_sandwich(spec in profile_strategy(2), zero in any::<bool>()) {
        let ext = if zero { Extension::Zero } else { Extension::Constant };
        let g = small_grid(2);
        let f = generate(&spec, &g).unwrap();
        let v = variation_report(&f, ext);
        prop_assert!(v.v_lower <= v.v_upper);
        let s = v.bd_boundary_sum.expect("corpus profiles are block decreasing");
        let sqrt_d = 2f64.sqrt();
        prop_assert!(s >= v.directional_sum / sqrt_d * 0.95 - 1e-12);
        prop_assert!(s <= v.directional_sum * sqrt_d * 1.05 + 1e-12);
    }

    #[test]
    fn permutation_symmetric_profiles_have_equal_axis_terms(
        p in prop_oneof![Just(None), (1.1f64..4.0).prop_map(Some)],
        shape in shape_strategy(),
    ) {
        let norm = match p { Some(p) => NormSpec64::Lp { p }, None => NormSpec64::Linf };
        let g = small_grid(2);
        let f = generate(&ProfileSpec64::Radial { norm, profile: shape }, &g).unwrap();
        let v = variation_report(&f, Extension::Constant);
        prop_assert!((v.per_axis[0] - v.per_axis[1]).abs() <= 1e-12 * v.per_axis[0].max(1.0));
    }

    #[test]
    fn csv_round_trip(spec in profile_strategy(2), h_inv in prop_oneof![Just(4.0), Just(8.0), Just(10.0)]) {
        let g = Grid64::new(2, &[1.0, 1.5], 1.0 / h_inv).unwrap();
        let f = generate(&spec, &g).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_csv(&f, &path).unwrap();
        let back: GridFunction64 = read_csv(&path).unwrap();
        prop_assert_eq!(back.grid().counts(), f.grid().counts());
        prop_assert_eq!(back.grid().spacing(), f.grid().spacing());
        prop_assert_eq!(back.values(), f.values());
    }

    #[test]
    fn norms_are_unconditional_and_subadditive(
        norm in norm_strategy(3),
        x in proptest::collection::vec(-3.0f64..3.0, 3),
        y in proptest::collection::vec(-3.0f64..3.0, 3),
        t in 0.01f64..10.0,
    ) {
        let n = |v: &[f64]| mu(&norm, v).unwrap();
        let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        prop_assert!((n(&x) - n(&abs)).abs() <= 1e-12 * n(&x).max(1.0));
        let tx: Vec<f64> = x.iter().map(|v| v * t).collect();
        prop_assert!((n(&tx) - t * n(&x)).abs() <= 1e-12 * (t * n(&x)).max(1.0));
        let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!(n(&s) <= (n(&x) + n(&y)) * (1.0 + 1e-12));
    }
}

#[test]
fn cell_counts_approach_continuum_volume() {
    let g = Grid64::new(2, &[40.0, 40.0], 1.0).unwrap();
    for norm in [NormSpec64::Linf, NormSpec64::l1()] {
        let st = stencil(&norm, 32.0, &g).unwrap();
        let ratio = st.cell_count() as f64 / 32f64.powi(2);
        let vol = norm.unit_ball_volume(2);
        assert!((ratio - vol).abs() / vol < 0.15, "{norm}: {ratio} vs {vol}");
    }
}
