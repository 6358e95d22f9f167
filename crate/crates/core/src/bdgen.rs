//! Block-decreasing test profiles, structure checks, the discrete precise
//! representative and jump-set estimates.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sample, Extension, Grid, GridFunction};
use crate::maxop::maximal_brute;
use crate::norms::{mu, NormSpec};
use crate::scalar::{from_usize, Scalar};

/// Tolerance on the discrete `‖g‖₁ = 1` normalization of separable profiles.
pub const SEPARABLE_NORM_TOL: f64 = 0.005;

/// A nonincreasing profile on `[0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Profile1d<T> {
    /// `exp(-rate·r)`
    Exp {
        rate: T,
    },
    /// `exp(-r²/(2σ²))`
    Gaussian {
        sigma: T,
    },
    /// `max(0, 1 - r/width)`
    Tent {
        width: T,
    },
    /// `1` on `[0, radius]`, else `0`.
    Step {
        radius: T,
    },
    /// `r^(-exponent)`, infinite at the origin and capped by `cap`.
    Power {
        exponent: T,
        cap: T,
    },
    Constant {
        value: T,
    },
}

impl<T: Scalar> Profile1d<T> {
    pub fn eval(&self, r: T) -> T {
        match self {
            Profile1d::Exp { rate } => (-*rate * r).exp(),
            Profile1d::Gaussian { sigma } => (-(r * r) / (T::of(2.0) * *sigma * *sigma)).exp(),
            Profile1d::Tent { width } => (T::one() - r / *width).max(T::zero()),
            Profile1d::Step { radius } => {
                if r <= *radius {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Profile1d::Power { exponent, .. } => r.powf(-*exponent),
            Profile1d::Constant { value } => *value,
        }
    }

    /// Upper bound of the profile, used as the sampling ceiling.
    pub fn peak(&self) -> T {
        match self {
            Profile1d::Power { cap, .. } => *cap,
            Profile1d::Constant { value } => *value,
            _ => T::one(),
        }
    }

    fn validate(&self) -> Result<()> {
        let pos = |v: &T, name: &str| {
            if *v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            Profile1d::Exp { rate } => pos(rate, "rate"),
            Profile1d::Gaussian { sigma } => pos(sigma, "sigma"),
            Profile1d::Tent { width } => pos(width, "width"),
            Profile1d::Step { radius } => pos(radius, "radius"),
            Profile1d::Power { exponent, cap } => pos(exponent, "exponent").and(pos(cap, "cap")),
            Profile1d::Constant { value } => pos(value, "value"),
        }
    }
}

/// Parameterized block-decreasing families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ProfileSpec<T> {
    /// Indicator of the closed cube `[-side/2, side/2]^d`.
    Square { side: T },
    /// Indicator of `{Σ|x_i|^p <= radius^p}` with `0 < p <= 1`.
    QuasiBall { p: T, radius: T },
    /// `profile(μ(x))`.
    Radial { norm: NormSpec<T>, profile: Profile1d<T> },
    /// `m·g(m|x_1|)·Π_{i>1} g(|x_i|)`, with `g(0) = 1` and `‖g‖₁ = 1`.
    Separable { m: u32, g: Profile1d<T> },
}

impl<T: Scalar> ProfileSpec<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProfileSpec::Square { side } => {
                if !(*side > T::zero()) {
                    return Err(Error::InvalidParameter(format!("side must be positive, got {side}")));
                }
            }
            ProfileSpec::QuasiBall { p, radius } => {
                if !(*p > T::zero() && *p <= T::one()) {
                    return Err(Error::InvalidParameter(format!("quasiball p must lie in (0,1], got {p}")));
                }
                if !(*radius > T::zero()) {
                    return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
                }
            }
            ProfileSpec::Radial { norm, profile } => {
                norm.validate(None)?;
                profile.validate()?;
            }
            ProfileSpec::Separable { m, g } => {
                if *m == 0 {
                    return Err(Error::InvalidParameter("m must be at least 1".into()));
                }
                g.validate()?;
                if g.eval(T::zero()) != T::one() {
                    return Err(Error::InvalidParameter("separable profile needs g(0) = 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Sampling ceiling: the function's supremum, or the cap for unbounded profiles.
    pub fn ceiling(&self) -> T {
        match self {
            ProfileSpec::Square { .. } | ProfileSpec::QuasiBall { .. } => T::one(),
            ProfileSpec::Radial { profile, .. } => profile.peak(),
            ProfileSpec::Separable { m, g } => from_usize::<T>(*m as usize) * g.peak(),
        }
    }

    fn eval(&self, x: &[T]) -> T {
        match self {
            ProfileSpec::Square { side } => {
                let h = *side / T::of(2.0);
                if x.iter().all(|v| v.abs() <= h) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            ProfileSpec::QuasiBall { p, radius } => {
                let s = x.iter().fold(T::zero(), |s, v| s + v.abs().powf(*p));
                if s <= radius.powf(*p) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            ProfileSpec::Radial { norm, profile } => profile.eval(mu(norm, x).unwrap_or(T::infinity())),
            ProfileSpec::Separable { m, g } => {
                let m = from_usize::<T>(*m as usize);
                let mut v = m * g.eval(m * x[0].abs());
                for xi in &x[1..] {
                    v = v * g.eval(xi.abs());
                }
                v
            }
        }
    }
}

/// Discrete half-line `‖·‖₁` of `r ↦ scale·g(scale·r)` sampled on `[0, extent]`
/// at spacing `h` (trapezoid weights, origin counted once by symmetry).
fn half_line_mass<T: Scalar>(g: &Profile1d<T>, scale: f64, h: f64, steps: usize) -> f64 {
    let mut s = 0.5 * g.eval(T::zero()).f64();
    for j in 1..=steps {
        s += g.eval(T::of(scale * j as f64 * h)).f64();
    }
    // the last node stands in for the continuation beyond the box
    s * h * scale
}

/// Samples a profile on `grid`.
pub fn generate<T: Scalar>(spec: &ProfileSpec<T>, grid: &Grid<T>) -> Result<GridFunction<T>> {
    spec.validate()?;
    match spec {
        ProfileSpec::Radial { norm, .. } => norm.validate(Some(grid.dim()))?,
        ProfileSpec::Separable { m, g } => {
            let h = grid.spacing().f64();
            for axis in 0..grid.dim() {
                let scale = if axis == 0 { *m as f64 } else { 1.0 };
                let mass = half_line_mass(g, scale, h, grid.mid(axis));
                if (mass - 1.0).abs() > SEPARABLE_NORM_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "separable profile has discrete half-line mass {mass:.5} on axis {axis}, \
                         needs 1 ± {SEPARABLE_NORM_TOL}"
                    )));
                }
            }
        }
        _ => {}
    }
    sample(grid, |x| spec.eval(x), spec.ceiling())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    /// `f(x) != f(reflection of x through a coordinate hyperplane)`
    Symmetry,
    /// `f` increases along an axis inside the positive cone.
    Monotonicity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BdViolation {
    pub kind: ViolationKind,
    pub axis: usize,
    pub node_a: Vec<usize>,
    pub node_b: Vec<usize>,
    pub value_a: f64,
    pub value_b: f64,
}

impl fmt::Display for BdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::Symmetry => "reflection mismatch",
            ViolationKind::Monotonicity => "increase toward infinity",
        };
        write!(
            f,
            "{what} on axis {}: {:?}={} vs {:?}={}",
            self.axis, self.node_a, self.value_a, self.node_b, self.value_b
        )
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BdCheck {
    /// The first ten violations in scan order.
    pub violations: Vec<BdViolation>,
    /// Number of violating node pairs in total.
    pub total: usize,
}

impl BdCheck {
    pub fn passed(&self) -> bool {
        self.total == 0
    }
}

const MAX_REPORTED: usize = 10;

/// Exact check of block-decreasing structure: symmetry under every
/// coordinate reflection and monotonicity along every axis in the cone.
pub fn check_block_decreasing<T: Scalar>(f: &GridFunction<T>) -> BdCheck {
    let g = f.grid();
    let d = g.dim();
    let vals = f.values();
    let strides = g.strides();
    let mut out = BdCheck::default();
    let push = |out: &mut BdCheck, kind, axis, a: usize, b: usize| {
        out.total += 1;
        if out.violations.len() < MAX_REPORTED {
            out.violations.push(BdViolation {
                kind,
                axis,
                node_a: g.unravel(a),
                node_b: g.unravel(b),
                value_a: vals[a].f64(),
                value_b: vals[b].f64(),
            });
        }
    };
    let mut idx = vec![0usize; d];
    for flat in 0..vals.len() {
        for axis in 0..d {
            let j = idx[axis];
            let mid = g.mid(axis);
            if j < mid {
                let r = flat - j * strides[axis] + g.reflect(axis, j) * strides[axis];
                if vals[flat] != vals[r] {
                    push(&mut out, ViolationKind::Symmetry, axis, flat, r);
                }
            }
        }
        if (0..d).all(|a| idx[a] >= g.mid(a)) {
            for axis in 0..d {
                if idx[axis] + 1 < g.counts()[axis] {
                    let next = flat + strides[axis];
                    if vals[next] > vals[flat] {
                        push(&mut out, ViolationKind::Monotonicity, axis, flat, next);
                    }
                }
            }
        }
        crate::grid::advance(&mut idx, g.counts());
    }
    out
}

/// Discrete precise representative: the largest average over the radius-`h`
/// cubes that contain the node.
pub fn precise_rep<T: Scalar>(f: &GridFunction<T>, ext: Extension) -> Result<GridFunction<T>> {
    let h = f.grid().spacing();
    let mf = maximal_brute(f, &NormSpec::Linf, Some(h), ext)?;
    mf.to_grid_function(f.ceiling())
}

/// A pair of adjacent nodes across which the function jumps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Face {
    pub axis: usize,
    /// Flat index of the lower node; the other is one step up along `axis`.
    pub node: usize,
    pub jump: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct JumpEstimate {
    pub faces: Vec<Face>,
    pub threshold: f64,
    /// `faces.len() · h^(d-1)`
    pub total_length: f64,
}

impl JumpEstimate {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "face_axis,node_index,jump")?;
        for face in &self.faces {
            writeln!(w, "{},{},{}", face.axis, face.node, face.jump)?;
        }
        Ok(())
    }

    pub fn max_jump(&self) -> f64 {
        self.faces.iter().map(|f| f.jump).fold(0.0, f64::max)
    }
}

/// Collects the faces between adjacent nodes with `|Δf| >= threshold`.
pub fn jump_estimate<T: Scalar>(f: &GridFunction<T>, threshold: T) -> Result<JumpEstimate> {
    if !(threshold > T::zero()) {
        return Err(Error::InvalidParameter(format!("threshold must be positive, got {threshold}")));
    }
    let g = f.grid();
    let d = g.dim();
    let vals = f.values();
    let strides = g.strides();
    let mut faces = Vec::new();
    let mut idx = vec![0usize; d];
    for flat in 0..vals.len() {
        for axis in 0..d {
            if idx[axis] + 1 < g.counts()[axis] {
                let jump = (vals[flat + strides[axis]] - vals[flat]).abs();
                if jump >= threshold {
                    faces.push(Face { axis, node: flat, jump: jump.f64() });
                }
            }
        }
        crate::grid::advance(&mut idx, g.counts());
    }
    let total_length = faces.len() as f64 * g.spacing().f64().powi(d as i32 - 1);
    Ok(JumpEstimate { faces, threshold: threshold.f64(), total_length })
}

/// Largest jump across faces with at least one endpoint within
/// `radius` (ℓ∞, domain units) of `point`.
pub fn max_jump_near<T: Scalar>(f: &GridFunction<T>, point: &[T], radius: T) -> f64 {
    let g = f.grid();
    let d = g.dim();
    let h = g.spacing().f64();
    let near = |flat: usize| {
        let x = g.node_coords(flat);
        (0..d).all(|a| (x[a] - point[a]).abs().f64() <= radius.f64() + 1e-9 * h)
    };
    let vals = f.values();
    let mut best = 0.0f64;
    for flat in 0..vals.len() {
        let idx = g.unravel(flat);
        for axis in 0..d {
            if idx[axis] + 1 < g.counts()[axis] {
                let other = flat + g.strides()[axis];
                if near(flat) || near(other) {
                    best = best.max((vals[other] - vals[flat]).abs().f64());
                }
            }
        }
    }
    best
}

/// The standard corpus of named block-decreasing profiles.
pub fn default_corpus<T: Scalar>() -> Vec<(String, ProfileSpec<T>)> {
    let t = T::of;
    vec![
        ("square".into(), ProfileSpec::Square { side: t(1.0) }),
        ("square-wide".into(), ProfileSpec::Square { side: t(1.5) }),
        ("quasiball-0.5".into(), ProfileSpec::QuasiBall { p: t(0.5), radius: t(1.0) }),
        ("quasiball-0.75".into(), ProfileSpec::QuasiBall { p: t(0.75), radius: t(1.2) }),
        ("diamond".into(), ProfileSpec::QuasiBall { p: t(1.0), radius: t(1.0) }),
        (
            "exp-l2".into(),
            ProfileSpec::Radial { norm: NormSpec::l2(), profile: Profile1d::Exp { rate: t(1.0) } },
        ),
        (
            "exp-linf".into(),
            ProfileSpec::Radial { norm: NormSpec::Linf, profile: Profile1d::Exp { rate: t(2.0) } },
        ),
        (
            "tent-linf".into(),
            ProfileSpec::Radial { norm: NormSpec::Linf, profile: Profile1d::Tent { width: t(1.0) } },
        ),
        (
            "tent-l1".into(),
            ProfileSpec::Radial { norm: NormSpec::l1(), profile: Profile1d::Tent { width: t(1.5) } },
        ),
        (
            "gauss-l2".into(),
            ProfileSpec::Radial { norm: NormSpec::l2(), profile: Profile1d::Gaussian { sigma: t(0.4) } },
        ),
        (
            "disk".into(),
            ProfileSpec::Radial { norm: NormSpec::l2(), profile: Profile1d::Step { radius: t(0.8) } },
        ),
        (
            "power-l2".into(),
            ProfileSpec::Radial {
                norm: NormSpec::l2(),
                profile: Profile1d::Power { exponent: t(0.5), cap: t(4.0) },
            },
        ),
        (
            "exp-rect".into(),
            ProfileSpec::Radial {
                norm: NormSpec::Rectangle { weights: vec![t(2.0), t(1.0), t(1.0)] },
                profile: Profile1d::Exp { rate: t(1.5) },
            },
        ),
        ("separable-1".into(), ProfileSpec::Separable { m: 1, g: Profile1d::Tent { width: t(2.0) } }),
        ("separable-2".into(), ProfileSpec::Separable { m: 2, g: Profile1d::Tent { width: t(2.0) } }),
    ]
}

/// [`default_corpus`] restricted to members that can be generated in `dim`
/// dimensions, with rectangle weights truncated to `dim`.
pub fn corpus_for_dim<T: Scalar>(dim: usize) -> Vec<(String, ProfileSpec<T>)> {
    default_corpus::<T>()
        .into_iter()
        .map(|(id, spec)| match spec {
            ProfileSpec::Radial { norm: NormSpec::Rectangle { weights }, profile } => {
                let mut w = weights;
                w.resize(dim, T::one());
                (id, ProfileSpec::Radial { norm: NormSpec::Rectangle { weights: w }, profile })
            }
            other => (id, other),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(e: f64, h: f64) -> Grid<f64> {
        Grid::new(2, &[e, e], h).unwrap()
    }

    #[test]
    fn square_is_indicator() {
        let g = grid2(2.0, 0.125);
        let f = generate(&ProfileSpec::Square { side: 1.0 }, &g).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0 || v == 1.0));
        assert!(check_block_decreasing(&f).passed());
    }

    #[test]
    fn quasiball_membership() {
        let g = grid2(2.0, 0.125);
        let f = generate(&ProfileSpec::QuasiBall { p: 0.5, radius: 1.0 }, &g).unwrap();
        for flat in 0..g.len() {
            let x = g.node_coords(flat);
            let inside = x[0].abs().sqrt() + x[1].abs().sqrt() <= 1.0;
            assert_eq!(f.values()[flat] == 1.0, inside, "{x:?}");
        }
    }

    #[test]
    fn separable_peak_is_m() {
        let g = grid2(2.0, 1.0 / 32.0);
        let f = generate(&ProfileSpec::Separable { m: 4, g: Profile1d::Tent { width: 2.0 } }, &g).unwrap();
        let o = g.ravel(&[g.mid(0), g.mid(1)]);
        assert_eq!(f.values()[o], 4.0);
    }

    #[test]
    fn separable_rejects_constant_g() {
        let g = grid2(2.0, 1.0 / 32.0);
        let err = generate(&ProfileSpec::Separable { m: 1, g: Profile1d::Constant { value: 1.0 } }, &g)
            .unwrap_err();
        assert!(err.to_string().contains("mass"), "{err}");
    }

    #[test]
    fn invalid_parameters() {
        let g = grid2(1.0, 0.25);
        assert!(generate(&ProfileSpec::QuasiBall { p: 1.5, radius: 1.0 }, &g).is_err());
        assert!(generate(&ProfileSpec::Square { side: 0.0 }, &g).is_err());
        assert!(generate(&ProfileSpec::Separable { m: 0, g: Profile1d::Tent { width: 2.0 } }, &g).is_err());
    }

    #[test]
    fn non_symmetric_input_fails() {
        let g = grid2(1.0, 0.25);
        let f = sample(&g, |x| x[0] + 1.0, 2.0).unwrap();
        let chk = check_block_decreasing(&f);
        assert!(!chk.passed());
        assert_eq!(chk.violations[0].kind, ViolationKind::Symmetry);
        assert!(chk.violations.len() <= 10);
    }

    #[test]
    fn increasing_outward_fails_monotonicity() {
        let g = grid2(1.0, 0.25);
        let f = sample(&g, |x: &[f64]| x[0].abs(), 2.0).unwrap();
        let chk = check_block_decreasing(&f);
        assert!(chk.violations.iter().all(|v| v.kind == ViolationKind::Monotonicity));
        assert!(!chk.passed());
    }

    #[test]
    fn corpus_is_block_decreasing() {
        for d in [2usize, 3] {
            let e = vec![2.0; d];
            let g = Grid::new(d, &e, 0.125).unwrap();
            for (id, spec) in corpus_for_dim::<f64>(d) {
                let f = generate(&spec, &g).unwrap_or_else(|e| panic!("{id}: {e}"));
                let chk = check_block_decreasing(&f);
                assert!(chk.passed(), "{id}: {:?}", chk.violations.first());
            }
        }
    }

    #[test]
    fn jump_estimate_of_constant_is_empty() {
        let c = GridFunction::constant(grid2(1.0, 0.25), 2.0).unwrap();
        assert!(jump_estimate(&c, 0.25).unwrap().faces.is_empty());
        assert!(jump_estimate(&c, 0.0).is_err());
    }

    #[test]
    fn precise_rep_of_constant() {
        let c = GridFunction::constant(grid2(1.0, 0.25), 2.0).unwrap();
        let p = precise_rep(&c, Extension::Constant).unwrap();
        assert!(p.values().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn precise_rep_square_boundary() {
        let g = grid2(1.0, 0.125);
        let f = generate(&ProfileSpec::Square { side: 1.0 }, &g).unwrap();
        let p = precise_rep(&f, Extension::Constant).unwrap();
        // node (1/2, 0) on the edge: the best 3x3 cube is centered one step
        // inside, fully in the square
        let edge = g.ravel(&[g.mid(0) + 4, g.mid(1)]);
        assert_eq!(p.values()[edge], 1.0);
        // node (5/8, 0) just outside: best cube centered on the edge column
        // holds 2 of 3 columns inside
        let out = g.ravel(&[g.mid(0) + 5, g.mid(1)]);
        assert_eq!(p.values()[out], 6.0 / 9.0);
        assert!(check_block_decreasing(&p).passed());
    }
}
