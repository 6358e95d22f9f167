//! Origin-symmetric grids and non-negative sampled functions.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_i64, Scalar};

/// A `d`-dimensional lattice on `Π[-e_i, e_i]` with uniform spacing.
///
/// Every axis has an odd node count so the origin is a node and the node set
/// is closed under reflection through each coordinate hyperplane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    half_extent: Vec<T>,
    spacing: T,
    counts: Vec<usize>,
    #[serde(skip)]
    strides: Vec<usize>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(dim: usize, half_extent: &[T], spacing: T) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if half_extent.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: half_extent.len() });
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        let mut counts = Vec::with_capacity(dim);
        for (axis, &e) in half_extent.iter().enumerate() {
            if !(e > T::zero()) || !e.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "half extent on axis {axis} must be positive, got {e}"
                )));
            }
            if spacing > e {
                return Err(Error::InvalidGrid(format!(
                    "spacing {spacing} exceeds half extent {e} on axis {axis}"
                )));
            }
            let half = (e / spacing)
                .round()
                .to_usize()
                .ok_or_else(|| Error::InvalidGrid(format!("node count overflow on axis {axis}")))?;
            counts.push(2 * half + 1);
        }
        Ok(Self::from_parts(half_extent.to_vec(), spacing, counts))
    }

    fn from_parts(half_extent: Vec<T>, spacing: T, counts: Vec<usize>) -> Self {
        let strides = row_major_strides(&counts);
        Self { half_extent, spacing, counts, strides }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn half_extent(&self) -> &[T] {
        &self.half_extent
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the origin along `axis`.
    #[inline]
    pub fn mid(&self, axis: usize) -> usize {
        (self.counts[axis] - 1) / 2
    }

    /// Signed lattice offset of index `j` from the origin along `axis`.
    #[inline]
    pub fn signed(&self, axis: usize, j: usize) -> i64 {
        j as i64 - self.mid(axis) as i64
    }

    /// Coordinate of node `j` along `axis`.
    #[inline]
    pub fn coord(&self, axis: usize, j: usize) -> T {
        from_i64::<T>(self.signed(axis, j)) * self.spacing
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for axis in 0..self.dim() {
            out[axis] = flat / self.strides[axis];
            flat %= self.strides[axis];
        }
        out
    }

    pub fn node_coords(&self, flat: usize) -> Vec<T> {
        self.unravel(flat).iter().enumerate().map(|(axis, &j)| self.coord(axis, j)).collect()
    }

    /// Mirror image of node `j` through the origin hyperplane of `axis`.
    #[inline]
    pub fn reflect(&self, axis: usize, j: usize) -> usize {
        self.counts[axis] - 1 - j
    }

    /// Largest ball-radius multiple of `spacing` that fits inside the box.
    pub fn max_half_extent(&self) -> T {
        self.half_extent.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub(crate) fn rebuild_strides(&mut self) {
        self.strides = row_major_strides(&self.counts);
    }
}

pub(crate) fn row_major_strides(counts: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; counts.len()];
    for axis in (0..counts.len().saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * counts[axis + 1];
    }
    strides
}

/// How a function continues beyond the sampled box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    /// Each out-of-box node takes the value of the nearest boundary node,
    /// i.e. indices are clamped per axis.
    Constant,
    /// Zero outside the box.
    Zero,
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extension::Constant => f.write_str("constant"),
            Extension::Zero => f.write_str("zero"),
        }
    }
}

/// Non-negative samples of a function on a [`Grid`], row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
    ceiling: T,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>, ceiling: T) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !(ceiling > T::zero()) || !ceiling.is_finite() {
            return Err(Error::InvalidParameter(format!("ceiling must be positive, got {ceiling}")));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= T::zero() && **v <= ceiling)) {
            return Err(Error::InvalidParameter(format!("value {v} at node {i} outside [0, {ceiling}]")));
        }
        Ok(Self { grid, values, ceiling })
    }

    /// Builds a constant function. Mostly handy in tests.
    pub fn constant(grid: Grid<T>, c: T) -> Result<Self> {
        let n = grid.len();
        let ceiling = if c > T::zero() { c } else { T::one() };
        Self::new(grid, vec![c; n], ceiling)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn ceiling(&self) -> T {
        self.ceiling
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// Multiplies every value by `lambda >= 0`, raising the ceiling with it.
    pub fn scaled(&self, lambda: T) -> Result<Self> {
        let values = self.values.iter().map(|&v| v * lambda).collect();
        let ceiling = if lambda > T::zero() { self.ceiling * lambda } else { self.ceiling };
        Self::new(self.grid.clone(), values, ceiling)
    }
}

/// Samples `f` at every node, capping at `ceiling`.
///
/// `+inf` is accepted and capped; NaN or a negative value is an error carrying
/// the node coordinates.
pub fn sample<T, F>(grid: &Grid<T>, f: F, ceiling: T) -> Result<GridFunction<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T,
{
    let mut values = Vec::with_capacity(grid.len());
    let mut x = vec![T::zero(); grid.dim()];
    let mut idx = vec![0usize; grid.dim()];
    for _ in 0..grid.len() {
        for axis in 0..grid.dim() {
            x[axis] = grid.coord(axis, idx[axis]);
        }
        let v = f(&x);
        if v.is_nan() || v < T::zero() {
            return Err(Error::Sampling {
                coords: x.iter().map(|c| c.f64()).collect(),
                reason: format!("value {v} is not a non-negative number"),
            });
        }
        values.push(v.min(ceiling));
        advance(&mut idx, grid.counts());
    }
    GridFunction::new(grid.clone(), values, ceiling)
}

/// Row-major increment of a multi-index. Wraps to zero after the last node.
#[inline]
pub(crate) fn advance(idx: &mut [usize], counts: &[usize]) {
    for axis in (0..idx.len()).rev() {
        idx[axis] += 1;
        if idx[axis] < counts[axis] {
            return;
        }
        idx[axis] = 0;
    }
}

const MAGIC: &str = "# maxreg-grid v1";

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Writes the grid-function file: one header line, then one line per row of
/// the last axis.
pub fn write_csv<T: Scalar>(gf: &GridFunction<T>, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_csv_to(gf, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv_to<T: Scalar, W: Write>(gf: &GridFunction<T>, w: &mut W) -> Result<()> {
    let g = gf.grid();
    writeln!(
        w,
        "{MAGIC} dim={} counts={} spacing={} half_extent={} ceiling={}",
        g.dim(),
        join(g.counts()),
        g.spacing(),
        join(g.half_extent()),
        gf.ceiling()
    )?;
    let row = *g.counts().last().unwrap();
    for chunk in gf.values().chunks(row) {
        let line = chunk.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<GridFunction<T>> {
    let file = fs::File::open(path)?;
    read_csv_from(BufReader::new(file))
}

fn fmt_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Format { line, reason: reason.into() }
}

fn parse_list<V: std::str::FromStr>(s: &str, line: usize, key: &str) -> Result<Vec<V>> {
    s.split(',')
        .map(|t| t.trim().parse::<V>().map_err(|_| fmt_err(line, format!("bad value {t:?} in {key}"))))
        .collect()
}

pub fn read_csv_from<T: Scalar, R: BufRead>(r: R) -> Result<GridFunction<T>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| fmt_err(1, "empty file"))??;
    let rest = header.strip_prefix(MAGIC).ok_or_else(|| fmt_err(1, "missing `# maxreg-grid v1` header"))?;

    let (mut dim, mut counts, mut spacing, mut half, mut ceiling) = (None, None, None, None, None);
    for field in rest.split_whitespace() {
        let (k, v) =
            field.split_once('=').ok_or_else(|| fmt_err(1, format!("expected key=value, got {field:?}")))?;
        match k {
            "dim" => dim = Some(v.parse::<usize>().map_err(|_| fmt_err(1, "bad dim"))?),
            "counts" => counts = Some(parse_list::<usize>(v, 1, k)?),
            "spacing" => spacing = Some(v.parse::<T>().map_err(|_| fmt_err(1, "bad spacing"))?),
            "half_extent" => half = Some(parse_list::<T>(v, 1, k)?),
            "ceiling" => ceiling = Some(v.parse::<T>().map_err(|_| fmt_err(1, "bad ceiling"))?),
            other => return Err(fmt_err(1, format!("unknown header key {other:?}"))),
        }
    }
    let dim = dim.ok_or_else(|| fmt_err(1, "missing dim"))?;
    let counts = counts.ok_or_else(|| fmt_err(1, "missing counts"))?;
    let spacing = spacing.ok_or_else(|| fmt_err(1, "missing spacing"))?;
    let half = half.ok_or_else(|| fmt_err(1, "missing half_extent"))?;
    let ceiling = ceiling.ok_or_else(|| fmt_err(1, "missing ceiling"))?;
    if counts.len() != dim || half.len() != dim {
        return Err(fmt_err(1, "counts/half_extent length disagrees with dim"));
    }

    // Re-derive the counts from the geometry so a header cannot describe an
    // impossible grid.
    let grid = Grid::new(dim, &half, spacing).map_err(|e| fmt_err(1, e.to_string()))?;
    if grid.counts() != counts.as_slice() {
        return Err(fmt_err(
            1,
            format!("counts {counts:?} do not match geometry (expected {:?})", grid.counts()),
        ));
    }

    let expected = grid.len();
    let mut values = Vec::with_capacity(expected);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        for tok in line.split(',') {
            let v: T = tok.trim().parse().map_err(|_| fmt_err(lineno, format!("bad number {tok:?}")))?;
            if v.is_nan() || v < T::zero() {
                return Err(fmt_err(lineno, format!("negative or NaN value {tok}")));
            }
            values.push(v);
        }
    }
    if values.len() != expected {
        return Err(fmt_err(0, format!("expected {expected} values, found {}", values.len())));
    }
    GridFunction::new(grid, values, ceiling).map_err(|e| fmt_err(0, e.to_string()))
}

impl<T: Scalar> Grid<T> {
    /// Restores derived data after deserialization.
    pub fn validated(mut self) -> Result<Self> {
        let fresh = Grid::new(self.dim(), &self.half_extent, self.spacing)?;
        if fresh.counts != self.counts {
            return Err(Error::InvalidGrid("counts disagree with geometry".into()));
        }
        self.rebuild_strides();
        Ok(self)
    }
}
