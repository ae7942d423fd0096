//! Branch-and-bound lower bound on `min_{dim S = k} max_j dist(v_j, S)` for
//! a finite point set in Euclidean space.
//!
//! Every `k`-dimensional subspace is the column span of a basis equal to
//! `I_k` on some `k` pivot rows and to a matrix `Z` with entries in
//! `[-1, 1]` on the others (take the pivot rows of maximal volume). Inside a
//! box of such `Z` around `Z_0`, `‖P_S − P_{S_0}‖ ≤ ‖Z − Z_0‖_2`, hence
//! `dist(v, S) ≥ dist(v, S_0) − ‖Z − Z_0‖_2 ‖v‖`.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use nalgebra::DMatrix;

use super::search::subsets;
use crate::linalg;

/// Largest number of chart coordinates `k(m − k)` handled.
pub(crate) const MAX_PARAMS: usize = 6;

struct Cell {
    lower: f64,
    chart: usize,
    center: Vec<f64>,
    half: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.lower.total_cmp(&other.lower) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    // min-heap on the lower bound
    fn cmp(&self, other: &Self) -> Ordering {
        other.lower.total_cmp(&self.lower)
    }
}

struct Problem<'a> {
    points: &'a DMatrix<f64>,
    norms: Vec<f64>,
    charts: Vec<(Vec<usize>, Vec<usize>)>,
    k: usize,
}

impl Problem<'_> {
    /// `(max_j dist(v_j, S_c), lower bound over the cell)`.
    fn evaluate(&self, chart: usize, center: &[f64], half: f64) -> (f64, f64) {
        let (pivots, rest) = &self.charts[chart];
        let m = self.points.nrows();
        let mut basis = DMatrix::zeros(m, self.k);
        for (c, &p) in pivots.iter().enumerate() {
            basis[(p, c)] = 1.0;
        }
        for (r, &row) in rest.iter().enumerate() {
            for c in 0..self.k {
                basis[(row, c)] = center[r * self.k + c];
            }
        }
        let q = linalg::orthonormal_columns(&basis);
        let radius = half * libm::sqrt(center.len() as f64);
        let mut value = 0.0f64;
        let mut lower = 0.0f64;
        for j in 0..self.points.ncols() {
            let v = self.points.column(j);
            let d = (v - &q * (q.transpose() * v)).norm();
            value = value.max(d);
            lower = lower.max(d - radius * self.norms[j]);
        }
        (value, lower)
    }
}

/// Lower bound on the minimum, given a known upper value. Stops once the
/// bound is within `tol` of the best value seen or after `budget` cells.
pub(crate) fn branch_lower(points: &DMatrix<f64>, k: usize, upper: f64, tol: f64, budget: usize) -> Option<f64> {
    let m = points.nrows();
    if k == 0 || k >= m || k * (m - k) > MAX_PARAMS {
        return None;
    }
    let p = k * (m - k);
    let charts: Vec<(Vec<usize>, Vec<usize>)> = subsets(m, k, usize::MAX)
        .into_iter()
        .map(|piv| {
            let rest = (0..m).filter(|i| !piv.contains(i)).collect();
            (piv, rest)
        })
        .collect();
    let norms = (0..points.ncols()).map(|j| points.column(j).norm()).collect();
    let prob = Problem { points, norms, charts, k };
    let mut best = upper;
    let mut heap = BinaryHeap::new();
    for chart in 0..prob.charts.len() {
        let center = alloc::vec![0.0; p];
        let (v, lower) = prob.evaluate(chart, &center, 1.0);
        best = best.min(v);
        heap.push(Cell { lower, chart, center, half: 1.0 });
    }
    let mut evaluations = heap.len();
    while let Some(cell) = heap.pop() {
        if cell.lower >= best - tol || evaluations >= budget {
            return Some(cell.lower.min(best));
        }
        let h = 0.5 * cell.half;
        for corner in 0..(1usize << p) {
            let center: Vec<f64> = (0..p).map(|i| cell.center[i] + if corner >> i & 1 == 1 { h } else { -h }).collect();
            let (v, lower) = prob.evaluate(cell.chart, &center, h);
            evaluations += 1;
            best = best.min(v);
            if lower < best - tol {
                heap.push(Cell { lower, chart: cell.chart, center, half: h });
            }
        }
    }
    Some(best)
}
