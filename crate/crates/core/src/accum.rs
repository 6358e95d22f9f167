//! Exact fixed-point ball sums.
//!
//! Values are mapped to `i128` multiples of `2^-S` with a per-function scale
//! `S`, and all sums over balls are exact integer sums. Two balls holding the
//! same multiset of values therefore have bit-identical sums regardless of
//! traversal order, and a ball whose exact sum dominates another's yields an
//! average that is `>=` after rounding. The block-decreasing and
//! brute-vs-pruned equalities in [`crate::maxop`] rely on this.

use crate::grid::{row_major_strides, Extension, GridFunction};
use crate::norms::Row;
use crate::scalar::Scalar;

/// Headroom reserved for the number of summed nodes (`2^40`).
const COUNT_BITS: i32 = 40;

/// Fixed-point encoding `v -> round(v · 2^S)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Quantizer {
    scale: i32,
    up: f64,
    down: f64,
}

impl Quantizer {
    /// Picks `S` so that `2^40` values at the function's maximum still fit.
    pub fn for_max(vmax: f64) -> Self {
        let scale = if vmax > 0.0 {
            let e = vmax.log2().ceil() as i32;
            (126 - COUNT_BITS - 1 - e).clamp(-1000, 1000)
        } else {
            0
        };
        Quantizer { scale, up: 2f64.powi(scale), down: 2f64.powi(-scale) }
    }

    pub fn for_function<T: Scalar>(f: &GridFunction<T>) -> Self {
        Self::for_max(f.max_value().f64())
    }

    #[inline]
    pub fn encode(self, v: f64) -> i128 {
        (v * self.up).round() as i128
    }

    /// Mean of `count` values whose encoded sum is `sum`.
    #[inline]
    pub fn average(self, sum: i128, count: usize) -> f64 {
        (sum as f64) * self.down / count as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SumKind {
    /// d-dimensional summed-area table; O(2^d) per box.
    Boxes,
    /// Prefix sums along the last axis; O(rows) per ball.
    Rows,
}

/// Quantized function on the grid padded by `pad[i]` nodes per side,
/// continued by the extension rule, with prefix sums for ball queries.
pub(crate) struct ExactSums {
    pub quant: Quantizer,
    kind: SumKind,
    pad: Vec<usize>,
    /// Padded node counts.
    pcounts: Vec<usize>,
    /// Strides of the prefix table (each axis length +1 where prefixed).
    tstrides: Vec<usize>,
    table: Vec<i128>,
}

impl ExactSums {
    pub fn new<T: Scalar>(f: &GridFunction<T>, ext: Extension, pad: &[usize], kind: SumKind) -> Self {
        let grid = f.grid();
        let d = grid.dim();
        let quant = Quantizer::for_function(f);
        let counts = grid.counts();
        let pcounts: Vec<usize> = (0..d).map(|a| counts[a] + 2 * pad[a]).collect();

        let tcounts: Vec<usize> = match kind {
            SumKind::Boxes => pcounts.iter().map(|c| c + 1).collect(),
            SumKind::Rows => {
                let mut t = pcounts.clone();
                t[d - 1] += 1;
                t
            }
        };
        let tstrides = row_major_strides(&tcounts);
        let total: usize = tcounts.iter().product();
        let mut table = vec![0i128; total];

        let encoded: Vec<i128> = f.values().iter().map(|v| quant.encode(v.f64())).collect();
        let gstrides = grid.strides();

        // Fill padded values at table position shifted by one on prefixed axes.
        let shift: Vec<usize> = match kind {
            SumKind::Boxes => vec![1; d],
            SumKind::Rows => {
                let mut s = vec![0; d];
                s[d - 1] = 1;
                s
            }
        };
        let mut p = vec![0usize; d];
        let ptotal: usize = pcounts.iter().product();
        for _ in 0..ptotal {
            let mut src = 0usize;
            let mut inside = true;
            for a in 0..d {
                let j = p[a] as i64 - pad[a] as i64;
                let j = if j < 0 || j >= counts[a] as i64 {
                    inside = false;
                    j.clamp(0, counts[a] as i64 - 1)
                } else {
                    j
                };
                src += j as usize * gstrides[a];
            }
            let v = if inside || ext == Extension::Constant { encoded[src] } else { 0 };
            let dst: usize = (0..d).map(|a| (p[a] + shift[a]) * tstrides[a]).sum();
            table[dst] = v;
            crate::grid::advance(&mut p, &pcounts);
        }

        // Cumulative sums along each prefixed axis.
        let axes: Vec<usize> = match kind {
            SumKind::Boxes => (0..d).collect(),
            SumKind::Rows => vec![d - 1],
        };
        for &a in &axes {
            let stride = tstrides[a];
            let len = tcounts[a];
            let block = stride * len;
            for base in (0..total).step_by(block) {
                for inner in 0..stride {
                    let mut acc = 0i128;
                    for t in 0..len {
                        let i = base + inner + t * stride;
                        acc += table[i];
                        table[i] = acc;
                    }
                }
            }
        }

        ExactSums { quant, kind, pad: pad.to_vec(), pcounts, tstrides, table }
    }

    /// Exact sum over the box `center ± half` (grid indices, inclusive).
    pub fn box_sum(&self, center: &[usize], half: &[i64]) -> i128 {
        debug_assert_eq!(self.kind, SumKind::Boxes);
        let d = center.len();
        if d == 2 {
            let s0 = self.tstrides[0];
            let r0 = (center[0] + self.pad[0]) as i64;
            let r1 = (center[1] + self.pad[1]) as i64;
            let (a0, b0) = ((r0 - half[0]) as usize * s0, (r0 + half[0] + 1) as usize * s0);
            let (a1, b1) = ((r1 - half[1]) as usize, (r1 + half[1] + 1) as usize);
            let t = &self.table;
            return t[b0 + b1] - t[a0 + b1] - t[b0 + a1] + t[a0 + a1];
        }
        let mut total = 0i128;
        for corner in 0..(1usize << d) {
            let mut idx = 0usize;
            let mut neg = false;
            for a in 0..d {
                let c = (center[a] + self.pad[a]) as i64;
                let t = if corner & (1 << a) != 0 {
                    c + half[a] + 1
                } else {
                    neg = !neg;
                    c - half[a]
                };
                debug_assert!(t >= 0 && t as usize <= self.pcounts[a]);
                idx += t as usize * self.tstrides[a];
            }
            if neg {
                total -= self.table[idx];
            } else {
                total += self.table[idx];
            }
        }
        total
    }

    /// Exact sum over a row-decomposed ball at `center`.
    pub fn rows_sum(&self, center: &[usize], rows: &CompiledRows) -> i128 {
        debug_assert_eq!(self.kind, SumKind::Rows);
        let d = center.len();
        let mut base = 0usize;
        for a in 0..d - 1 {
            base += (center[a] + self.pad[a]) * self.tstrides[a];
        }
        let cl = (center[d - 1] + self.pad[d - 1]) as isize;
        let mut total = 0i128;
        for &(delta, w) in &rows.rows {
            let r = (base as isize + delta) as usize;
            let hi = r + (cl + w as isize + 1) as usize;
            let lo = r + (cl - w as isize) as usize;
            total += self.table[hi] - self.table[lo];
        }
        total
    }

    /// Turns ball rows into offsets into the prefix table.
    pub fn compile(&self, rows: &[Row]) -> CompiledRows {
        debug_assert_eq!(self.kind, SumKind::Rows);
        let d = self.pcounts.len();
        let rows = rows
            .iter()
            .map(|row| {
                let delta: isize = (0..d - 1).map(|a| row.lead[a] as isize * self.tstrides[a] as isize).sum();
                (delta, row.half_width)
            })
            .collect();
        CompiledRows { rows }
    }
}

pub(crate) struct CompiledRows {
    rows: Vec<(isize, i64)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, Grid};
    use crate::norms::{ball_rows, NormSpec};

    #[test]
    fn quantizer_is_exact_for_moderate_values() {
        let q = Quantizer::for_max(4.0);
        for v in [0.0, 1.0, 0.1, 3.999, 1e-6] {
            let s = q.encode(v);
            assert_eq!(q.average(s, 1), v);
        }
    }

    #[test]
    fn box_and_row_sums_agree_with_direct_sum() {
        let g = Grid::<f64>::new(2, &[1.0, 0.75], 0.25).unwrap();
        let f = sample(&g, |x| (x[0] + 2.0) * (x[1] + 1.5) * 0.3, 10.0).unwrap();
        let pad = [4usize, 4];
        for ext in [Extension::Constant, Extension::Zero] {
            let boxes = ExactSums::new(&f, ext, &pad, SumKind::Boxes);
            let rows = ExactSums::new(&f, ext, &pad, SumKind::Rows);
            let q = boxes.quant;
            let counts = g.counts().to_vec();
            let value = |i: i64, j: i64| -> i128 {
                let inside = i >= 0 && j >= 0 && i < counts[0] as i64 && j < counts[1] as i64;
                if !inside && ext == Extension::Zero {
                    return 0;
                }
                let ci = i.clamp(0, counts[0] as i64 - 1) as usize;
                let cj = j.clamp(0, counts[1] as i64 - 1) as usize;
                q.encode(f.values()[g.ravel(&[ci, cj])])
            };
            let st = ball_rows(&NormSpec::<f64>::Linf, 2, 3.0);
            let compiled = rows.compile(&st);
            for ci in 0..counts[0] {
                for cj in 0..counts[1] {
                    let mut direct = 0i128;
                    for di in -3..=3i64 {
                        for dj in -3..=3i64 {
                            direct += value(ci as i64 + di, cj as i64 + dj);
                        }
                    }
                    assert_eq!(boxes.box_sum(&[ci, cj], &[3, 3]), direct);
                    assert_eq!(rows.rows_sum(&[ci, cj], &compiled), direct);
                }
            }
        }
    }
}
