//! Small dense linear-programming kernels.
//!
//! Every LP in this crate is posed so that the origin is feasible:
//!
//! ```text
//! maximize  c^T x   subject to  A x <= b,  x >= 0,  b >= 0
//! ```
//!
//! which lets a single-phase tableau simplex with slack starting basis solve
//! it. Also hosts a Lawson–Hanson non-negative least squares used for
//! Lagrange-multiplier recovery.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solution of a packing-form LP together with its dual multipliers.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One non-negative multiplier per constraint row; `b^T y = objective`.
    pub duals: Vec<f64>,
}

const MAX_PIVOTS: usize = 20_000;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_SWITCH: usize = 64;

/// Maximize `c^T x` subject to `A x <= b`, `x >= 0` with `b >= 0`.
///
/// `a` is row-major with `rows * c.len()` entries.
pub fn maximize(c: &[f64], a: &[f64], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = b.len();
    debug_assert_eq!(a.len(), n * m);
    if b.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParameter("lp right-hand side must be non-negative".into()));
    }
    let width = n + m + 1;
    let mut tab = vec![0.0f64; (m + 1) * width];
    for i in 0..m {
        let row = &mut tab[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&a[i * n..(i + 1) * n]);
        row[n + i] = 1.0;
        row[width - 1] = b[i];
    }
    let obj = m * width;
    for j in 0..n {
        tab[obj + j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let cscale = c.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let red_tol = 1e-12 * cscale;
    let mut degenerate = 0usize;

    for _ in 0..MAX_PIVOTS {
        let bland = degenerate >= DEGENERATE_SWITCH;
        // entering column
        let mut enter = None;
        let mut best = -red_tol;
        for j in 0..n + m {
            let r = tab[obj + j];
            if r < best {
                enter = Some(j);
                if bland {
                    break;
                }
                best = r;
            }
        }
        let Some(q) = enter else {
            return Ok(extract(&tab, &basis, n, m, width));
        };
        let col_scale = (0..m).fold(0.0f64, |s, i| s.max(tab[i * width + q].abs()));
        let piv_tol = 1e-11 * col_scale.max(1e-300);
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let aij = tab[i * width + q];
            if aij > piv_tol {
                let ratio = tab[i * width + width - 1] / aij;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best_ratio - 1e-15 * best_ratio.abs().max(1.0)
                            || (ratio <= best_ratio + 1e-15 * best_ratio.abs().max(1.0)
                                && basis[i] < basis[l])
                    }
                };
                if better {
                    leave = Some(i);
                    best_ratio = best_ratio.min(ratio);
                }
            }
        }
        let Some(p) = leave else {
            return Err(Error::SolverFailure { bound: f64::INFINITY });
        };
        if best_ratio <= 1e-14 {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        pivot(&mut tab, m + 1, width, p, q);
        basis[p] = q;
    }
    let partial = extract(&tab, &basis, n, m, width);
    Err(Error::SolverFailure { bound: partial.objective })
}

fn pivot(tab: &mut [f64], rows: usize, width: usize, p: usize, q: usize) {
    let inv = 1.0 / tab[p * width + q];
    for j in 0..width {
        tab[p * width + j] *= inv;
    }
    tab[p * width + q] = 1.0;
    for i in 0..rows {
        if i == p {
            continue;
        }
        let f = tab[i * width + q];
        if f == 0.0 {
            continue;
        }
        for j in 0..width {
            let v = tab[p * width + j];
            if v != 0.0 {
                tab[i * width + j] -= f * v;
            }
        }
        tab[i * width + q] = 0.0;
    }
}

fn extract(tab: &[f64], basis: &[usize], n: usize, m: usize, width: usize) -> LpSolution {
    let mut x = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab[i * width + width - 1].max(0.0);
        }
    }
    let duals = (0..m).map(|i| tab[m * width + n + i].max(0.0)).collect();
    LpSolution { x, objective: tab[m * width + width - 1], duals }
}

/// Lawson–Hanson non-negative least squares: `min ||E x - f||_2`, `x >= 0`.
pub fn nnls(e: &DMatrix<f64>, f: &DVector<f64>) -> DVector<f64> {
    let n = e.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-13 * e.iter().fold(1.0f64, |s, v| s.max(v.abs())) * (n.max(1) as f64);
    for _outer in 0..(3 * n + 10) {
        let w = e.transpose() * (f - e * &x);
        let mut cand = None;
        let mut best = tol;
        for j in 0..n {
            if !passive[j] && w[j] > best {
                best = w[j];
                cand = Some(j);
            }
        }
        let Some(j) = cand else { break };
        passive[j] = true;
        for _inner in 0..(3 * n + 10) {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = e.select_columns(&idx);
            let z_sub = crate::linalg::lstsq(&sub, f, 1e-14);
            if z_sub.iter().all(|&v| v > 0.0) {
                for (pos, &k) in idx.iter().enumerate() {
                    x[k] = z_sub[pos];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (pos, &k) in idx.iter().enumerate() {
                if z_sub[pos] <= 0.0 {
                    let denom = x[k] - z_sub[pos];
                    if denom > 0.0 {
                        alpha = alpha.min(x[k] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (pos, &k) in idx.iter().enumerate() {
                x[k] += alpha * (z_sub[pos] - x[k]);
                if x[k] <= 1e-15 {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
        }
    }
    x
}
