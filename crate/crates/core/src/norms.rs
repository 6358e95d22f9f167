//! Unconditional norms and their rasterized balls.
//!
//! Ball membership is decided on integer lattice offsets measured in units of
//! the grid spacing, so a stencil depends only on the norm and the radius in
//! steps. This keeps every stencil exactly closed under sign flips.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{from_usize, Scalar};

/// Relative slack on membership tests against a power of the radius.
const MEMBERSHIP_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NormSpec<T> {
    /// `(Σ|x_i|^p)^(1/p)` with `p >= 1`.
    Lp {
        p: T,
    },
    Linf,
    /// `max_i |x_i| / w_i`: the gauge of the box `Π[-w_i, w_i]`.
    Rectangle {
        weights: Vec<T>,
    },
}

impl<T: Scalar> NormSpec<T> {
    pub fn l1() -> Self {
        NormSpec::Lp { p: T::one() }
    }

    pub fn l2() -> Self {
        NormSpec::Lp { p: T::of(2.0) }
    }

    pub fn lp(p: T) -> Result<Self> {
        let spec = NormSpec::Lp { p };
        spec.validate(None)?;
        Ok(spec)
    }

    pub fn rectangle(weights: Vec<T>) -> Result<Self> {
        let spec = NormSpec::Rectangle { weights };
        spec.validate(None)?;
        Ok(spec)
    }

    /// Checks parameters, and the dimension when one is given.
    pub fn validate(&self, dim: Option<usize>) -> Result<()> {
        match self {
            NormSpec::Lp { p } => {
                if !(p.f64() >= 1.0) || !p.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "lp exponent must be finite and >= 1, got {p}"
                    )));
                }
            }
            NormSpec::Linf => {}
            NormSpec::Rectangle { weights } => {
                if weights.is_empty() || weights.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "rectangle weights must be positive and finite".into(),
                    ));
                }
                if let Some(d) = dim {
                    if weights.len() != d {
                        return Err(Error::DimensionMismatch { expected: d, got: weights.len() });
                    }
                }
            }
        }
        Ok(())
    }

    /// `true` for the box-shaped balls (ℓ∞ and rectangles).
    pub fn is_box(&self) -> bool {
        matches!(self, NormSpec::Linf | NormSpec::Rectangle { .. })
    }

    pub fn is_permutation_symmetric(&self) -> bool {
        match self {
            NormSpec::Rectangle { weights } => weights.windows(2).all(|w| w[0] == w[1]),
            _ => true,
        }
    }

    /// Smallest `c` with `μ(w) <= c·‖w‖₂` for all `w` in `d` dimensions.
    pub fn l2_domination_constant(&self, d: usize) -> f64 {
        match self {
            NormSpec::Linf => 1.0,
            NormSpec::Lp { p } => {
                let p = p.f64();
                let e = (1.0 / p - 0.5).max(0.0);
                (d as f64).powf(e)
            }
            NormSpec::Rectangle { weights } => {
                let wmin = weights.iter().map(|w| w.f64()).fold(f64::INFINITY, f64::min);
                1.0 / wmin
            }
        }
    }

    /// Lebesgue measure of the unit ball in `d` dimensions.
    pub fn unit_ball_volume(&self, d: usize) -> f64 {
        let df = d as f64;
        match self {
            NormSpec::Linf => 2f64.powi(d as i32),
            NormSpec::Lp { p } => {
                let p = p.f64();
                (2.0 * libm::tgamma(1.0 + 1.0 / p)).powi(d as i32) / libm::tgamma(1.0 + df / p)
            }
            NormSpec::Rectangle { weights } => {
                2f64.powi(d as i32) * weights.iter().map(|w| w.f64()).product::<f64>()
            }
        }
    }

    /// Largest `|o_i|` allowed on `axis` for a ball of radius `r` lattice steps.
    pub(crate) fn axis_reach(&self, axis: usize, r: f64) -> i64 {
        let r = r * (1.0 + MEMBERSHIP_SLACK);
        match self {
            NormSpec::Rectangle { weights } => (r * weights[axis].f64()).floor() as i64,
            _ => r.floor() as i64,
        }
    }

    /// Lattice membership `μ(o) <= r` with `r` in steps.
    pub(crate) fn contains_offset(&self, o: &[i64], r: f64) -> bool {
        match self {
            NormSpec::Linf => {
                let lim = r.floor() as i64;
                o.iter().all(|v| v.abs() <= lim)
            }
            NormSpec::Rectangle { .. } => {
                o.iter().enumerate().all(|(axis, v)| v.abs() <= self.axis_reach(axis, r))
            }
            NormSpec::Lp { p } => {
                let p = p.f64();
                if p == 1.0 {
                    let s: i64 = o.iter().map(|v| v.abs()).sum();
                    (s as f64) <= r * (1.0 + MEMBERSHIP_SLACK)
                } else if p == 2.0 {
                    let s: i64 = o.iter().map(|v| v * v).sum();
                    (s as f64) <= r * r * (1.0 + MEMBERSHIP_SLACK)
                } else {
                    let s: f64 = o.iter().map(|v| (v.abs() as f64).powf(p)).sum();
                    s <= r.powf(p) * (1.0 + MEMBERSHIP_SLACK)
                }
            }
        }
    }
}

impl<T: Scalar> fmt::Display for NormSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Linf => f.write_str("linf"),
            NormSpec::Lp { p } if p.f64() == 1.0 => f.write_str("l1"),
            NormSpec::Lp { p } if p.f64() == 2.0 => f.write_str("l2"),
            NormSpec::Lp { p } => write!(f, "lp:{p}"),
            NormSpec::Rectangle { weights } => {
                let w: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
                write!(f, "rect:{}", w.join(","))
            }
        }
    }
}

impl<T: Scalar> FromStr for NormSpec<T> {
    type Err = Error;

    /// Parses `linf`, `l1`, `l2`, `lp:<p>` or `rect:<w1>,<w2>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown norm {s:?}"));
        let s = s.trim();
        match s {
            "linf" => return Ok(NormSpec::Linf),
            "l1" => return Ok(NormSpec::l1()),
            "l2" => return Ok(NormSpec::l2()),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("lp:") {
            let p: T = p.parse().map_err(|_| bad())?;
            return NormSpec::lp(p);
        }
        if let Some(ws) = s.strip_prefix("rect:") {
            let weights = ws
                .split(',')
                .map(|w| w.trim().parse::<T>().map_err(|_| bad()))
                .collect::<Result<Vec<T>>>()?;
            return NormSpec::rectangle(weights);
        }
        Err(bad())
    }
}

/// Evaluates `μ(x)`.
pub fn mu<T: Scalar>(norm: &NormSpec<T>, x: &[T]) -> Result<T> {
    match norm {
        NormSpec::Linf => Ok(x.iter().fold(T::zero(), |m, v| m.max(v.abs()))),
        NormSpec::Lp { p } => {
            if p.f64() == 1.0 {
                Ok(x.iter().fold(T::zero(), |s, v| s + v.abs()))
            } else if p.f64() == 2.0 {
                Ok(x.iter().fold(T::zero(), |s, v| s + *v * *v).sqrt())
            } else {
                let s = x.iter().fold(T::zero(), |s, v| s + v.abs().powf(*p));
                Ok(s.powf(p.recip()))
            }
        }
        NormSpec::Rectangle { weights } => {
            if weights.len() != x.len() {
                return Err(Error::DimensionMismatch { expected: weights.len(), got: x.len() });
            }
            Ok(x.iter().zip(weights).fold(T::zero(), |m, (v, w)| m.max(v.abs() / *w)))
        }
    }
}

/// One row of a rasterized ball: all offsets sharing the leading `d-1`
/// coordinates form the interval `[-half_width, half_width]` on the last axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Row {
    pub lead: Vec<i64>,
    pub half_width: i64,
}

/// Row decomposition of the ball of radius `steps` lattice steps, rows in
/// lexicographic order of `lead`.
pub(crate) fn ball_rows<T: Scalar>(norm: &NormSpec<T>, dim: usize, steps: f64) -> Vec<Row> {
    let reach: Vec<i64> = (0..dim).map(|a| norm.axis_reach(a, steps)).collect();
    let lead_dim = dim - 1;
    let mut rows = Vec::new();
    let mut lead: Vec<i64> = reach[..lead_dim].iter().map(|r| -r).collect();
    let mut probe = vec![0i64; dim];
    loop {
        probe[..lead_dim].copy_from_slice(&lead);
        probe[lead_dim] = 0;
        if norm.contains_offset(&probe, steps) {
            // Membership is monotone in |o_last|; walk outward.
            let mut w = 0;
            while w < reach[lead_dim] {
                probe[lead_dim] = w + 1;
                if !norm.contains_offset(&probe, steps) {
                    break;
                }
                w += 1;
            }
            rows.push(Row { lead: lead.clone(), half_width: w });
        }
        // advance lead lexicographically over [-reach, reach]
        let mut axis = lead_dim;
        loop {
            if axis == 0 {
                return rows;
            }
            axis -= 1;
            if lead[axis] < reach[axis] {
                lead[axis] += 1;
                for a in axis + 1..lead_dim {
                    lead[a] = -reach[a];
                }
                break;
            }
        }
    }
}

/// A rasterized closed ball `{o : μ(o·h) <= radius}`.
#[derive(Clone, Debug)]
pub struct BallStencil<T> {
    norm: NormSpec<T>,
    radius: T,
    dim: usize,
    offsets: Vec<i64>,
    reach: Vec<i64>,
}

impl<T: Scalar> BallStencil<T> {
    pub fn norm(&self) -> &NormSpec<T> {
        &self.norm
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_count(&self) -> usize {
        self.offsets.len() / self.dim
    }

    /// Offsets in lexicographic order.
    pub fn offsets(&self) -> impl Iterator<Item = &[i64]> + '_ {
        self.offsets.chunks_exact(self.dim)
    }

    pub fn contains(&self, o: &[i64]) -> bool {
        self.offsets().any(|x| x == o)
    }

    /// Largest `|o_i|` per axis.
    pub fn reach(&self) -> &[i64] {
        &self.reach
    }

    /// Debug dump: one offset vector per line.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for o in self.offsets() {
            let line: Vec<String> = o.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Rasterizes the `norm` ball of the given radius on `grid`.
pub fn stencil<T: Scalar>(norm: &NormSpec<T>, radius: T, grid: &Grid<T>) -> Result<BallStencil<T>> {
    let dim = grid.dim();
    norm.validate(Some(dim))?;
    let h = grid.spacing();
    if !(radius >= h) {
        return Err(Error::InvalidParameter(format!("stencil radius {radius} is below the spacing {h}")));
    }
    let steps = (radius / h).f64();
    let reach: Vec<i64> = (0..dim).map(|a| norm.axis_reach(a, steps)).collect();
    let fits = reach.iter().zip(grid.counts()).all(|(&r, &c)| r < c as i64);
    if !fits {
        let max_steps = (0..dim)
            .map(|a| {
                let span = (grid.counts()[a] - 1) as f64;
                match norm {
                    NormSpec::Rectangle { weights } => span / weights[a].f64(),
                    _ => span,
                }
            })
            .fold(f64::INFINITY, f64::min);
        return Err(Error::RadiusTooLarge { radius: radius.f64(), max_feasible: max_steps * h.f64() });
    }
    let rows = ball_rows(norm, dim, steps);
    let mut offsets = Vec::new();
    for row in &rows {
        for t in -row.half_width..=row.half_width {
            offsets.extend_from_slice(&row.lead);
            offsets.push(t);
        }
    }
    Ok(BallStencil { norm: norm.clone(), radius, dim, offsets, reach })
}

/// Radii `{h, 2h, ..., K·h}` over which maximal functions take their supremum,
/// with `K·h <= min(cap, max half extent)`.
pub fn radius_ladder<T: Scalar>(grid: &Grid<T>, cap: Option<T>) -> Result<Vec<T>> {
    let h = grid.spacing();
    Ok((1..=ladder_steps(grid, cap)?).map(|k| from_usize::<T>(k) * h).collect())
}

/// Number of rungs in [`radius_ladder`].
pub fn ladder_steps<T: Scalar>(grid: &Grid<T>, cap: Option<T>) -> Result<usize> {
    let h = grid.spacing();
    let mut top = grid.max_half_extent();
    if let Some(c) = cap {
        if !(c >= h) {
            return Err(Error::CapBelowSpacing { cap: c.f64(), spacing: h.f64() });
        }
        top = top.min(c);
    }
    Ok(((top / h).f64() * (1.0 + MEMBERSHIP_SLACK)).floor() as usize)
}
