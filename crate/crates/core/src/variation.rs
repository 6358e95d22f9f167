//! Total variation estimates from the coordinate-axis decomposition.
//!
//! For a function of bounded variation on `R^d`, the sum of its partial
//! variations `V_i` bounds the total variation from above, and divided by
//! `√d` it bounds it from below. Every report carries both ends.

use serde::Serialize;

use crate::bdgen::check_block_decreasing;
use crate::error::{Error, Result};
use crate::grid::{Extension, Grid, GridFunction};
use crate::maxop::MaxField;
use crate::scalar::Scalar;

/// Grid metadata stamped into reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridMeta {
    pub dim: usize,
    pub counts: Vec<usize>,
    pub spacing: f64,
    pub half_extent: Vec<f64>,
}

impl GridMeta {
    pub fn of<T: Scalar>(g: &Grid<T>) -> Self {
        GridMeta {
            dim: g.dim(),
            counts: g.counts().to_vec(),
            spacing: g.spacing().f64(),
            half_extent: g.half_extent().iter().map(|e| e.f64()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VariationReport {
    pub per_axis: Vec<f64>,
    pub directional_sum: f64,
    pub v_lower: f64,
    pub v_upper: f64,
    pub bd_boundary_sum: Option<f64>,
    pub method: String,
    pub grid: GridMeta,
    pub extension: Extension,
    /// Largest value on the boundary of the box. Variation beyond the box is
    /// not counted; this is how much mass is left at the edge.
    pub boundary_residual: f64,
}

impl VariationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Variation of one sampled line, including the jumps to the continuation at
/// both ends (none for constant extension, `v_first + v_last` for zero).
pub fn variation_1d<T: Scalar>(values: &[T], ext: Extension) -> Result<T> {
    let (first, last) = match (values.first(), values.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::InvalidParameter("empty line".into())),
    };
    let inner = values.windows(2).fold(T::zero(), |s, w| s + (w[1] - w[0]).abs());
    Ok(match ext {
        Extension::Constant => inner,
        Extension::Zero => inner + first + last,
    })
}

/// `h^(d-1) · Σ_lines V(line)` for every axis in one pass.
fn per_axis_sums<T: Scalar>(f: &GridFunction<T>, ext: Extension) -> Vec<f64> {
    let g = f.grid();
    let d = g.dim();
    let vals = f.values();
    let strides = g.strides();
    let mut sums = vec![0f64; d];
    let mut idx = vec![0usize; d];
    for flat in 0..vals.len() {
        let v = vals[flat].f64();
        for axis in 0..d {
            let j = idx[axis];
            let n = g.counts()[axis];
            if j + 1 < n {
                sums[axis] += (vals[flat + strides[axis]].f64() - v).abs();
            }
            if ext == Extension::Zero && (j == 0 || j + 1 == n) {
                sums[axis] += v;
                if n == 1 {
                    sums[axis] += v;
                }
            }
        }
        crate::grid::advance(&mut idx, g.counts());
    }
    let cell = g.spacing().f64().powi(d as i32 - 1);
    sums.iter().map(|s| s * cell).collect()
}

fn boundary_residual<T: Scalar>(f: &GridFunction<T>) -> f64 {
    let g = f.grid();
    let mut idx = vec![0usize; g.dim()];
    let mut m = 0f64;
    for &v in f.values() {
        if idx.iter().zip(g.counts()).any(|(&j, &n)| j == 0 || j + 1 == n) {
            m = m.max(v.f64());
        }
        crate::grid::advance(&mut idx, g.counts());
    }
    m
}

pub fn variation_directional<T: Scalar>(f: &GridFunction<T>, ext: Extension) -> VariationReport {
    let per_axis = per_axis_sums(f, ext);
    let directional_sum: f64 = per_axis.iter().sum();
    let d = f.grid().dim() as f64;
    VariationReport {
        directional_sum,
        v_lower: directional_sum / d.sqrt(),
        v_upper: directional_sum,
        per_axis,
        bd_boundary_sum: None,
        method: "directional".into(),
        grid: GridMeta::of(f.grid()),
        extension: ext,
        boundary_residual: boundary_residual(f),
    }
}

/// Directional report with the block-decreasing boundary sum filled in when
/// the input is block decreasing.
pub fn variation_report<T: Scalar>(f: &GridFunction<T>, ext: Extension) -> VariationReport {
    let mut rep = variation_directional(f, ext);
    rep.bd_boundary_sum = variation_bd_boundary(f, ext).ok();
    if rep.bd_boundary_sum.is_some() {
        rep.method = "directional+bd-boundary".into();
    }
    rep
}

/// Variation of a maximal field's values. The extension must match the one
/// the field was computed with.
pub fn variation_of_field<T: Scalar>(mf: &MaxField<T>, ext: Extension) -> Result<VariationReport> {
    if mf.extension() != ext {
        return Err(Error::ExtensionMismatch {
            field: mf.extension().to_string(),
            requested: ext.to_string(),
        });
    }
    let ceiling = mf.values().iter().copied().fold(T::one(), T::max);
    let gf = mf.to_grid_function(ceiling)?;
    Ok(variation_report(&gf, ext))
}

/// Boundary formula for block-decreasing functions:
/// `S = 2^d Σ_i ∫_{[0,∞)^{d-1}} [f(x̂_i, 0+) - f(x̂_i, ∞)] dx̂_i`,
/// which satisfies `V(f) <= S <= √d·V(f)`.
///
/// `f(x̂_i, 0+)` is read on the origin hyperplane and
/// `f(x̂_i, ∞)` at the box boundary (or as 0 under zero extension). The
/// orthant sum is evaluated over all lines of the full grid, which weights
/// nodes on the coordinate hyperplanes correctly.
pub fn variation_bd_boundary<T: Scalar>(f: &GridFunction<T>, ext: Extension) -> Result<f64> {
    let chk = check_block_decreasing(f);
    if let Some(v) = chk.violations.first() {
        return Err(Error::NotBlockDecreasing(v.to_string()));
    }
    let g = f.grid();
    let d = g.dim();
    let vals = f.values();
    let strides = g.strides();
    let mut total = 0f64;
    let mut idx = vec![0usize; d];
    for flat in 0..vals.len() {
        for axis in 0..d {
            // one contribution per line, taken at its origin node
            if idx[axis] != g.mid(axis) || g.counts()[axis] == 1 {
                continue;
            }
            let near = vals[flat].f64();
            let far = match ext {
                Extension::Constant => vals[flat + (g.counts()[axis] - 1 - idx[axis]) * strides[axis]].f64(),
                Extension::Zero => 0.0,
            };
            total += 2.0 * (near - far);
        }
        crate::grid::advance(&mut idx, g.counts());
    }
    Ok(total * g.spacing().f64().powi(d as i32 - 1))
}

/// The single-axis term `V_i` of the directional decomposition (0-based axis).
pub fn partial_variation<T: Scalar>(f: &GridFunction<T>, axis: usize, ext: Extension) -> Result<f64> {
    let d = f.grid().dim();
    if axis >= d {
        return Err(Error::AxisOutOfRange { axis, dim: d });
    }
    Ok(per_axis_sums(f, ext)[axis])
}
