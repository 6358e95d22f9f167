//! Discrete uncentered, centered and local maximal functions.
//!
//! Ball centers are grid nodes and radii run over [`radius_ladder`]. The
//! supremum is therefore taken over a finite family and is attained; each
//! node records the ball that attains it. Ties go to the smallest radius and
//! then to the lexicographically smallest center in [`maximal_brute`] and
//! [`maximal_centered`].
//!
//! [`maximal_bd_pruned`] exploits block-decreasing structure: ball sums are
//! block decreasing in the center, so for a node `x` in the closed positive
//! cone only centers in `Π[0, x_i]` matter, and among those only the ones
//! that cannot slide further toward the origin while still covering `x`.
//! For box-shaped balls that leaves one candidate per radius,
//! `c_i = max(0, x_i - reach_i)`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::accum::{CompiledRows, ExactSums, Quantizer, SumKind};
use crate::bdgen::check_block_decreasing;
use crate::error::{Error, Result};
use crate::grid::{Extension, Grid, GridFunction};
use crate::norms::{ball_rows, ladder_steps, BallStencil, NormSpec, Row};
use crate::scalar::{from_usize, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Centering {
    Uncentered,
    Centered,
}

/// Maximal value at one node and the ball attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxRecord<T> {
    pub node: Vec<usize>,
    pub value: T,
    pub witness_center: Vec<usize>,
    pub witness_radius: T,
}

/// A maximal function on a grid with per-node witnesses.
#[derive(Clone, Debug)]
pub struct MaxField<T> {
    grid: Grid<T>,
    norm: NormSpec<T>,
    radius_cap: Option<T>,
    extension: Extension,
    centering: Centering,
    values: Vec<T>,
    centers: Vec<usize>,
    steps: Vec<u32>,
}

impl<T: Scalar> MaxField<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn norm(&self) -> &NormSpec<T> {
        &self.norm
    }

    pub fn radius_cap(&self) -> Option<T> {
        self.radius_cap
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat index of the witness center at node `i`.
    pub fn witness_center_flat(&self, i: usize) -> usize {
        self.centers[i]
    }

    /// Witness radius in lattice steps.
    pub fn witness_steps(&self, i: usize) -> usize {
        self.steps[i] as usize
    }

    pub fn witness_radius(&self, i: usize) -> T {
        from_usize::<T>(self.steps[i] as usize) * self.grid.spacing()
    }

    pub fn record(&self, i: usize) -> MaxRecord<T> {
        MaxRecord {
            node: self.grid.unravel(i),
            value: self.values[i],
            witness_center: self.grid.unravel(self.centers[i]),
            witness_radius: self.witness_radius(i),
        }
    }

    /// The values as a grid function; the ceiling is the source ceiling.
    pub fn to_grid_function(&self, ceiling: T) -> Result<GridFunction<T>> {
        let max = self.values.iter().copied().fold(T::zero(), T::max);
        GridFunction::new(self.grid.clone(), self.values.clone(), ceiling.max(max))
    }

    /// Witness sidecar: `node_index,center_index,radius,value` per line.
    pub fn write_witness_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "node_index,center_index,radius,value")?;
        for i in 0..self.values.len() {
            writeln!(w, "{},{},{},{}", i, self.centers[i], self.witness_radius(i), self.values[i])?;
        }
        Ok(())
    }
}

/// Rasterized ball for one rung of the radius ladder.
struct Ball {
    steps: usize,
    rows: Vec<Row>,
    count: usize,
    reach: Vec<i64>,
}

fn ball_family<T: Scalar>(norm: &NormSpec<T>, dim: usize, k_max: usize) -> Vec<Ball> {
    (1..=k_max)
        .map(|k| {
            let steps = k as f64;
            let rows = ball_rows(norm, dim, steps);
            let count = rows.iter().map(|r| 2 * r.half_width as usize + 1).sum();
            let reach = (0..dim).map(|a| norm.axis_reach(a, steps)).collect();
            Ball { steps: k, rows, count, reach }
        })
        .collect()
}

struct Setup {
    balls: Vec<Ball>,
    pad: Vec<usize>,
    kind: SumKind,
}

fn setup<T: Scalar>(f: &GridFunction<T>, norm: &NormSpec<T>, cap: Option<T>) -> Result<Setup> {
    let grid = f.grid();
    let d = grid.dim();
    norm.validate(Some(d))?;
    let k_max = ladder_steps(grid, cap)?;
    let balls = ball_family(norm, d, k_max);
    let mut pad = vec![0usize; d];
    if let Some(top) = balls.last() {
        for a in 0..d {
            if top.reach[a] > grid.counts()[a] as i64 - 1 {
                let span = (grid.counts()[a] - 1) as f64;
                let max_steps = match norm {
                    NormSpec::Rectangle { weights } => span / weights[a].f64(),
                    _ => span,
                };
                return Err(Error::RadiusTooLarge {
                    radius: (from_usize::<T>(top.steps) * grid.spacing()).f64(),
                    max_feasible: max_steps * grid.spacing().f64(),
                });
            }
            pad[a] = top.reach[a] as usize;
        }
    }
    let kind = if norm.is_box() { SumKind::Boxes } else { SumKind::Rows };
    Ok(Setup { balls, pad, kind })
}

/// Sum over `ball` centered at `center`, dispatching on the table kind.
struct BallSummer<'a> {
    sums: &'a ExactSums,
    ball: &'a Ball,
    compiled: Option<CompiledRows>,
}

impl<'a> BallSummer<'a> {
    fn new(sums: &'a ExactSums, ball: &'a Ball, kind: SumKind) -> Self {
        let compiled = match kind {
            SumKind::Rows => Some(sums.compile(&ball.rows)),
            SumKind::Boxes => None,
        };
        BallSummer { sums, ball, compiled }
    }

    #[inline]
    fn average(&self, center: &[usize]) -> f64 {
        let s = match &self.compiled {
            Some(rows) => self.sums.rows_sum(center, rows),
            None => self.sums.box_sum(center, &self.ball.reach),
        };
        self.sums.quant.average(s, self.ball.count)
    }
}

/// Running per-node optimum. Only strict improvements are accepted, so the
/// visiting order decides ties.
struct Best {
    value: Vec<f64>,
    center: Vec<usize>,
    steps: Vec<u32>,
}

impl Best {
    fn new(n: usize) -> Self {
        Best { value: vec![f64::NEG_INFINITY; n], center: vec![0; n], steps: vec![0; n] }
    }

    fn into_field<T: Scalar>(
        self,
        grid: &Grid<T>,
        norm: &NormSpec<T>,
        cap: Option<T>,
        ext: Extension,
        centering: Centering,
    ) -> MaxField<T> {
        MaxField {
            grid: grid.clone(),
            norm: norm.clone(),
            radius_cap: cap,
            extension: ext,
            centering,
            values: self.value.into_iter().map(T::of).collect(),
            centers: self.center,
            steps: self.steps,
        }
    }
}

/// Runs `body(lead_index, row_flat_start)` over every last-axis row in
/// parallel, with mutable per-row slices of the three `Best` arrays.
fn for_each_row<F>(grid_counts: &[usize], best: &mut Best, body: F)
where
    F: Fn(&[usize], usize, &mut [f64], &mut [usize], &mut [u32]) + Sync,
{
    let d = grid_counts.len();
    let row_len = grid_counts[d - 1];
    let lead_counts = &grid_counts[..d - 1];
    best.value
        .par_chunks_mut(row_len)
        .zip(best.center.par_chunks_mut(row_len))
        .zip(best.steps.par_chunks_mut(row_len))
        .enumerate()
        .for_each(|(r, ((v, c), s))| {
            let lead = unravel_lead(r, lead_counts);
            body(&lead, r * row_len, v, c, s);
        });
}

fn unravel_lead(mut r: usize, lead_counts: &[usize]) -> Vec<usize> {
    let mut lead = vec![0; lead_counts.len()];
    for a in (0..lead_counts.len()).rev() {
        lead[a] = r % lead_counts[a];
        r /= lead_counts[a];
    }
    lead
}

/// Average of `f` over the nodes of `st` centered at `center`, with
/// out-of-box nodes continued by `ext`.
pub fn ball_average<T: Scalar>(
    f: &GridFunction<T>,
    center: &[usize],
    st: &BallStencil<T>,
    ext: Extension,
) -> Result<T> {
    let grid = f.grid();
    let d = grid.dim();
    if center.len() != d || st.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: center.len().min(st.dim()) });
    }
    if center.iter().zip(grid.counts()).any(|(c, n)| c >= n) {
        return Err(Error::InvalidParameter(format!("center {center:?} outside the grid")));
    }
    let q = Quantizer::for_function(f);
    let mut sum = 0i128;
    let mut idx = vec![0usize; d];
    for o in st.offsets() {
        let mut inside = true;
        for a in 0..d {
            let j = center[a] as i64 + o[a];
            let n = grid.counts()[a] as i64;
            if j < 0 || j >= n {
                inside = false;
            }
            idx[a] = j.clamp(0, n - 1) as usize;
        }
        if inside || ext == Extension::Constant {
            sum += q.encode(f.values()[grid.ravel(&idx)].f64());
        }
    }
    Ok(T::of(q.average(sum, st.cell_count())))
}

/// Sliding maximum over `[j-w, j+w]` (clipped) with the leftmost argmax.
fn sliding_max(src: &[f64], w: usize, out_v: &mut [f64], out_a: &mut [u32], deque: &mut Vec<usize>) {
    let n = src.len();
    deque.clear();
    let mut head = 0usize;
    for i in 0..n + w {
        if i < n {
            while deque.len() > head && src[*deque.last().unwrap()] < src[i] {
                deque.pop();
            }
            deque.push(i);
        }
        if i >= w {
            let j = i - w;
            while deque[head] + w < j {
                head += 1;
            }
            out_v[j] = src[deque[head]];
            out_a[j] = deque[head] as u32;
        }
    }
}

/// Uncentered maximal function by exhaustive search over every grid-node
/// center and every ladder radius.
///
/// For each radius the ball averages at all centers are formed once; each
/// node then scans every ball row that can contain it, using a sliding
/// window maximum along the last axis within the row.
pub fn maximal_brute<T: Scalar>(
    f: &GridFunction<T>,
    norm: &NormSpec<T>,
    radius_cap: Option<T>,
    ext: Extension,
) -> Result<MaxField<T>> {
    let grid = f.grid();
    let Setup { balls, pad, kind } = setup(f, norm, radius_cap)?;
    let sums = ExactSums::new(f, ext, &pad, kind);
    let counts = grid.counts().to_vec();
    let d = counts.len();
    let n = grid.len();
    let row_len = counts[d - 1];
    let lead_counts = counts[..d - 1].to_vec();
    let strides = grid.strides().to_vec();
    let mut best = Best::new(n);

    for ball in &balls {
        let summer = BallSummer::new(&sums, ball, kind);
        let mut avg = vec![0f64; n];
        avg.par_chunks_mut(row_len).enumerate().for_each(|(r, out)| {
            let mut c = unravel_lead(r, &lead_counts);
            c.push(0);
            for (j, o) in out.iter_mut().enumerate() {
                c[d - 1] = j;
                *o = summer.average(&c);
            }
        });

        // Row-window maxima for every distinct half width.
        let mut widths: Vec<i64> = ball.rows.iter().map(|r| r.half_width).collect();
        widths.sort_unstable();
        widths.dedup();
        let slot_of = |w: i64| widths.binary_search(&w).unwrap();
        let windows: Vec<(Vec<f64>, Vec<u32>)> = widths
            .par_iter()
            .map(|&w| {
                let mut v = vec![0f64; n];
                let mut a = vec![0u32; n];
                let mut dq = Vec::with_capacity(row_len);
                for ((src, ov), oa) in
                    avg.chunks(row_len).zip(v.chunks_mut(row_len)).zip(a.chunks_mut(row_len))
                {
                    sliding_max(src, w as usize, ov, oa, &mut dq);
                }
                (v, a)
            })
            .collect();
        let row_slots: Vec<usize> = ball.rows.iter().map(|r| slot_of(r.half_width)).collect();

        let steps = ball.steps as u32;
        for_each_row(&counts, &mut best, |lead, _start, bv, bc, bs| {
            'rows: for (row, &slot) in ball.rows.iter().zip(&row_slots) {
                let mut base = 0usize;
                for a in 0..d - 1 {
                    let c = lead[a] as i64 + row.lead[a];
                    if c < 0 || c >= counts[a] as i64 {
                        continue 'rows;
                    }
                    base += c as usize * strides[a];
                }
                let (wv, wa) = &windows[slot];
                for j in 0..row_len {
                    let v = wv[base + j];
                    if v > bv[j] {
                        bv[j] = v;
                        bc[j] = base + wa[base + j] as usize;
                        bs[j] = steps;
                    }
                }
            }
        });
    }
    Ok(best.into_field(grid, norm, radius_cap, ext, Centering::Uncentered))
}

/// Centered maximal function: balls are centered at the evaluation node.
pub fn maximal_centered<T: Scalar>(
    f: &GridFunction<T>,
    norm: &NormSpec<T>,
    radius_cap: Option<T>,
    ext: Extension,
) -> Result<MaxField<T>> {
    let grid = f.grid();
    let Setup { balls, pad, kind } = setup(f, norm, radius_cap)?;
    let sums = ExactSums::new(f, ext, &pad, kind);
    let counts = grid.counts().to_vec();
    let d = counts.len();
    let mut best = Best::new(grid.len());
    for ball in &balls {
        let summer = BallSummer::new(&sums, ball, kind);
        let steps = ball.steps as u32;
        for_each_row(&counts, &mut best, |lead, start, bv, bc, bs| {
            let mut c = lead.to_vec();
            c.push(0);
            for j in 0..bv.len() {
                c[d - 1] = j;
                let v = summer.average(&c);
                if v > bv[j] {
                    bv[j] = v;
                    bc[j] = start + j;
                    bs[j] = steps;
                }
            }
        });
    }
    Ok(best.into_field(grid, norm, radius_cap, ext, Centering::Centered))
}

/// Candidate-center rule for [`maximal_bd_pruned_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneRule {
    /// Slide every center coordinate as far toward the origin as the ball allows.
    Clamp,
    /// Fault injection for oracle checks: never move the center along this
    /// axis. Produces wrong values whenever the optimum needs that move.
    FreezeAxis(usize),
}

/// Uncentered maximal function of a block-decreasing input.
///
/// Values are identical to [`maximal_brute`]; witnesses may differ. Fails
/// with [`Error::NotBlockDecreasing`] when the input is not block decreasing.
pub fn maximal_bd_pruned<T: Scalar>(
    f: &GridFunction<T>,
    norm: &NormSpec<T>,
    radius_cap: Option<T>,
    ext: Extension,
) -> Result<MaxField<T>> {
    maximal_bd_pruned_with(f, norm, radius_cap, ext, PruneRule::Clamp)
}

pub fn maximal_bd_pruned_with<T: Scalar>(
    f: &GridFunction<T>,
    norm: &NormSpec<T>,
    radius_cap: Option<T>,
    ext: Extension,
    rule: PruneRule,
) -> Result<MaxField<T>> {
    let report = check_block_decreasing(f);
    if let Some(v) = report.violations.first() {
        return Err(Error::NotBlockDecreasing(v.to_string()));
    }
    let grid = f.grid();
    let Setup { balls, pad, kind } = setup(f, norm, radius_cap)?;
    let sums = ExactSums::new(f, ext, &pad, kind);
    let counts = grid.counts().to_vec();
    let d = counts.len();
    let mids: Vec<usize> = (0..d).map(|a| grid.mid(a)).collect();
    let frozen = match rule {
        PruneRule::Clamp => None,
        PruneRule::FreezeAxis(a) => Some(a),
    };

    // Work on the closed positive cone, indexed locally from the origin.
    let cone_counts: Vec<usize> = (0..d).map(|a| counts[a] - mids[a]).collect();
    let cone_grid_strides = crate::grid::row_major_strides(&cone_counts);
    let cone_n: usize = cone_counts.iter().product();
    let mut best = Best::new(cone_n);

    for ball in &balls {
        let steps = ball.steps as u32;
        match kind {
            SumKind::Boxes => {
                let summer = BallSummer::new(&sums, ball, kind);
                for_each_row(&cone_counts, &mut best, |lead, _start, bv, bc, bs| {
                    let mut x = vec![0usize; d];
                    let mut c = vec![0usize; d];
                    for a in 0..d - 1 {
                        x[a] = lead[a] + mids[a];
                    }
                    for j in 0..bv.len() {
                        x[d - 1] = j + mids[d - 1];
                        for a in 0..d {
                            c[a] = if frozen == Some(a) {
                                x[a]
                            } else {
                                (x[a] as i64 - ball.reach[a]).max(mids[a] as i64) as usize
                            };
                        }
                        let v = summer.average(&c);
                        if v > bv[j] {
                            bv[j] = v;
                            bc[j] = grid.ravel(&c);
                            bs[j] = steps;
                        }
                    }
                });
            }
            SumKind::Rows => {
                // Ball averages at every cone center for this radius.
                let summer = BallSummer::new(&sums, ball, kind);
                let cone_row = cone_counts[d - 1];
                let mut avg = vec![0f64; cone_n];
                let cone_lead_counts = cone_counts[..d - 1].to_vec();
                avg.par_chunks_mut(cone_row).enumerate().for_each(|(r, out)| {
                    let lead = unravel_lead(r, &cone_lead_counts);
                    let mut c: Vec<usize> = lead.iter().zip(&mids).map(|(l, m)| l + m).collect();
                    c.push(0);
                    for (j, o) in out.iter_mut().enumerate() {
                        c[d - 1] = j + mids[d - 1];
                        *o = summer.average(&c);
                    }
                });
                // Rows with non-negative lead offsets move the center toward
                // the origin; the last coordinate slides to its lower limit.
                let rows: Vec<&Row> = ball
                    .rows
                    .iter()
                    .filter(|r| r.lead.iter().all(|&o| o >= 0))
                    .filter(|r| match frozen {
                        Some(a) if a < d - 1 => r.lead[a] == 0,
                        _ => true,
                    })
                    .collect();
                let freeze_last = frozen == Some(d - 1);
                for_each_row(&cone_counts, &mut best, |lead, _start, bv, bc, bs| {
                    'rows: for row in &rows {
                        let mut base = 0usize;
                        let mut center_lead = Vec::with_capacity(d);
                        for a in 0..d - 1 {
                            let o = row.lead[a] as usize;
                            if o > lead[a] {
                                continue 'rows;
                            }
                            base += (lead[a] - o) * cone_grid_strides[a];
                            center_lead.push(lead[a] - o + mids[a]);
                        }
                        let w = row.half_width as usize;
                        for j in 0..bv.len() {
                            let cj = if freeze_last { j } else { j.saturating_sub(w) };
                            let v = avg[base + cj];
                            if v > bv[j] {
                                bv[j] = v;
                                let mut c = center_lead.clone();
                                c.push(cj + mids[d - 1]);
                                bc[j] = grid.ravel(&c);
                                bs[j] = steps;
                            }
                        }
                    }
                });
            }
        }
    }

    // Reflect the cone solution onto the full grid.
    let n = grid.len();
    let mut full = Best::new(n);
    let gstrides = grid.strides().to_vec();
    for_each_row(&counts, &mut full, |lead, _start, bv, bc, bs| {
        let mut y = lead.to_vec();
        y.push(0);
        let mut cone_base = 0usize;
        for a in 0..d - 1 {
            cone_base += lead[a].abs_diff(mids[a]) * cone_grid_strides[a];
        }
        for j in 0..bv.len() {
            y[d - 1] = j;
            let ci = cone_base + j.abs_diff(mids[d - 1]);
            bv[j] = best.value[ci];
            bs[j] = best.steps[ci];
            let mut rem = best.center[ci];
            let mut flat = 0usize;
            for a in 0..d {
                let mut c = rem / gstrides[a];
                rem %= gstrides[a];
                if y[a] < mids[a] {
                    c = 2 * mids[a] - c;
                }
                flat += c * gstrides[a];
            }
            bc[j] = flat;
        }
    });
    Ok(full.into_field(grid, norm, radius_cap, ext, Centering::Uncentered))
}

/// Discrete `E_{n,k}`: nodes whose witness radius is at least `1/n` and
/// whose maximal value is at most `k`. For a local field (radius cap `R`)
/// the radius must also lie in `[1/n, R]`; pass `k = +inf` for the pure
/// `E_{R,n}` set.
pub fn enk_classify<T: Scalar>(mf: &MaxField<T>, n: u32, k: T) -> Vec<bool> {
    let min_r = 1.0 / n as f64;
    let cap = mf.radius_cap.map(|r| r.f64()).unwrap_or(f64::INFINITY);
    let h = mf.grid.spacing().f64();
    (0..mf.len())
        .map(|i| {
            let r = mf.steps[i] as f64 * h;
            r >= min_r * (1.0 - 1e-12) && r <= cap * (1.0 + 1e-12) && mf.values[i] <= k
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample;
    use crate::norms::stencil;

    fn square(h: f64, e: f64) -> GridFunction<f64> {
        let g = Grid::new(2, &[e, e], h).unwrap();
        sample(&g, |x| if x[0].abs() <= 0.5 && x[1].abs() <= 0.5 { 1.0 } else { 0.0 }, 1.0).unwrap()
    }

    #[test]
    fn sliding_max_matches_naive() {
        let src = [1.0, 3.0, 2.0, 3.0, 0.0, 5.0, 5.0, 1.0];
        for w in 0..5usize {
            let mut v = vec![0.0; src.len()];
            let mut a = vec![0u32; src.len()];
            let mut dq = Vec::new();
            sliding_max(&src, w, &mut v, &mut a, &mut dq);
            for j in 0..src.len() {
                let lo = j.saturating_sub(w);
                let hi = (j + w).min(src.len() - 1);
                let m = src[lo..=hi].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let arg = (lo..=hi).find(|&i| src[i] == m).unwrap();
                assert_eq!((v[j], a[j] as usize), (m, arg), "w={w} j={j}");
            }
        }
    }

    #[test]
    fn ball_average_examples() {
        let f = square(0.25, 2.0);
        let g = f.grid().clone();
        let origin = [g.mid(0), g.mid(1)];
        let half = stencil(&NormSpec::Linf, 0.5, &g).unwrap();
        assert_eq!(ball_average(&f, &origin, &half, Extension::Constant).unwrap(), 1.0);
        let one = stencil(&NormSpec::Linf, 1.0, &g).unwrap();
        assert_eq!(one.cell_count(), 81);
        // nodes with max(|x|,|y|) <= 1/2 at spacing 1/4: indices -2..=2 -> 25
        let v = ball_average(&f, &origin, &one, Extension::Constant).unwrap();
        assert_eq!(v, 25.0 / 81.0);

        let c = GridFunction::constant(g.clone(), 2.5).unwrap();
        let corner = [0usize, 0];
        assert_eq!(ball_average(&c, &corner, &one, Extension::Constant).unwrap(), 2.5);
    }

    #[test]
    fn constant_is_fixed() {
        let g = Grid::new(2, &[1.0, 1.0], 0.25).unwrap();
        let c = GridFunction::constant(g, 3.0).unwrap();
        for norm in [NormSpec::Linf, NormSpec::l2()] {
            for mf in [
                maximal_brute(&c, &norm, None, Extension::Constant).unwrap(),
                maximal_bd_pruned(&c, &norm, None, Extension::Constant).unwrap(),
                maximal_centered(&c, &norm, None, Extension::Constant).unwrap(),
            ] {
                assert!(mf.values().iter().all(|&v| v == 3.0));
                // smallest radius wins ties
                assert!((0..mf.len()).all(|i| mf.witness_steps(i) == 1));
            }
        }
    }

    #[test]
    fn square_origin_is_one() {
        let f = square(0.125, 1.0);
        let mf = maximal_brute(&f, &NormSpec::Linf, None, Extension::Constant).unwrap();
        let o = f.grid().ravel(&[8, 8]);
        assert_eq!(mf.values()[o], 1.0);
    }

    #[test]
    fn pruned_rejects_non_bd() {
        let g = Grid::new(2, &[1.0, 1.0], 0.25).unwrap();
        let f = sample(&g, |x| x[0] + 1.0, 2.0).unwrap();
        let err = maximal_bd_pruned(&f, &NormSpec::Linf, None, Extension::Zero).unwrap_err();
        assert!(matches!(err, Error::NotBlockDecreasing(_)));
    }

    #[test]
    fn pruned_matches_brute_on_square() {
        let f = square(0.125, 1.0);
        for norm in
            [NormSpec::Linf, NormSpec::l1(), NormSpec::l2(), NormSpec::rectangle(vec![2.0, 1.0]).unwrap()]
        {
            let b = maximal_brute(&f, &norm, Some(0.5), Extension::Constant).unwrap();
            let p = maximal_bd_pruned(&f, &norm, Some(0.5), Extension::Constant).unwrap();
            assert_eq!(b.values(), p.values(), "{norm}");
            for i in 0..b.len() {
                assert_eq!(b.witness_steps(i), p.witness_steps(i));
            }
        }
    }

    #[test]
    fn frozen_axis_is_detected() {
        let f = square(0.125, 1.0);
        let b = maximal_brute(&f, &NormSpec::Linf, None, Extension::Constant).unwrap();
        let bad =
            maximal_bd_pruned_with(&f, &NormSpec::Linf, None, Extension::Constant, PruneRule::FreezeAxis(0))
                .unwrap();
        assert_ne!(b.values(), bad.values());
    }

    #[test]
    fn witness_contains_node() {
        let f = square(0.125, 1.0);
        let norm = NormSpec::l2();
        let mf = maximal_brute(&f, &norm, None, Extension::Constant).unwrap();
        let g = f.grid();
        for i in 0..mf.len() {
            let r = mf.record(i);
            let diff: Vec<f64> =
                (0..2).map(|a| (r.node[a] as f64 - r.witness_center[a] as f64) * g.spacing()).collect();
            assert!(crate::norms::mu(&norm, &diff).unwrap() <= r.witness_radius + 1e-12);
        }
    }

    #[test]
    fn enk_vacuous_and_empty() {
        let f = square(0.125, 1.0);
        let mf = maximal_brute(&f, &NormSpec::Linf, None, Extension::Constant).unwrap();
        let all = enk_classify(&mf, 100, 1.0);
        assert!(all.iter().all(|&b| b));
        let none = enk_classify(&mf, 1, 0.0);
        assert!(none.iter().zip(mf.values()).all(|(&m, &v)| !m || v == 0.0));
    }
}
