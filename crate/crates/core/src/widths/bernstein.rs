//! Lower bounds from `n`-dimensional domain subspaces.
//!
//! If `‖Tx‖ ≥ b‖x‖` on an `n`-dimensional `E`, then `T(B_X)` contains the
//! radius-`b` ball of the `n`-dimensional space `T(E)`, and no subspace of
//! dimension `< n` approximates that ball better than `b`. So
//! `d_n ≥ inf_{x ∈ E} ‖Tx‖ / ‖x‖` for every such `E`.
//!
//! With a Euclidean codomain and a polyhedral domain the infimum is exact:
//! `{c : ‖Bc‖_X ≤ 1}` is cut out by `fᵀBc ≤ 1` over the extreme points `f`
//! of the dual ball, and the ellipsoidal distance to each such hyperplane is
//! `1 / ‖G^{-1/2} Bᵀf‖` with `G = (MB)ᵀ(MB)`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::search::subsets;
use super::SearchConfig;
use crate::linalg;
use crate::operator::Reduced;
use crate::spaces::{extreme_points_capped, NormKind, NormSpec};

/// `inf_{x ∈ span B} ‖Mx‖_2 / ‖x‖_X`, or 0 when `MB` is rank deficient.
fn ratio(m: &DMatrix<f64>, dual: &[DVector<f64>], b: &DMatrix<f64>) -> f64 {
    let mb = m * b;
    let Some(chol) = (mb.transpose() * &mb).cholesky() else {
        return 0.0;
    };
    let mut worst = 0.0f64;
    for f in dual {
        let a = b.transpose() * f;
        let q = a.dot(&chol.solve(&a));
        worst = worst.max(q);
    }
    if worst > 0.0 {
        1.0 / libm::sqrt(worst)
    } else {
        0.0
    }
}

/// Best bound found over coordinate subspaces, the top right singular
/// subspace and a seeded local search from the best of them. Returns 0 when
/// the case is not covered.
pub(crate) fn bernstein_lower(red: &Reduced, n: usize, cfg: &SearchConfig, stream: u64, target: f64) -> f64 {
    let dim = red.m.ncols();
    if red.codomain != NormKind::P2 || red.domain == NormKind::P2 || n == 0 || n > dim || n > red.m.nrows() {
        return 0.0;
    }
    let Ok(dual) = extreme_points_capped(&NormSpec::new(red.domain.dual()), dim, cfg.sign_cap) else {
        return 0.0;
    };
    let good_enough = |v: f64| v >= target * (1.0 - 1e-13);

    let mut starts: Vec<(f64, DMatrix<f64>)> = Vec::new();
    let (_, _, v) = linalg::sorted_svd(&red.m);
    if v.ncols() >= n {
        let b = v.columns(0, n).clone_owned();
        starts.push((ratio(&red.m, &dual, &b), b));
    }
    for subset in subsets(dim, n, cfg.subset_cap) {
        let b = DMatrix::from_fn(dim, n, |i, j| if i == subset[j] { 1.0 } else { 0.0 });
        starts.push((ratio(&red.m, &dual, &b), b));
    }
    starts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = starts.first().map_or(0.0, |s| s.0);
    if good_enough(best) {
        return best;
    }

    // random-direction hill climbing with a shrinking step
    let mut rng = linalg::rng(cfg.seed, stream ^ 0xB3A5_7E1A);
    for (v0, b0) in starts.into_iter().take(cfg.ascent_restarts.max(1)) {
        let (mut value, mut b) = (v0, b0);
        let mut step = 0.3;
        let mut fails = 0;
        for _ in 0..40 * cfg.max_iters {
            let trial = &b + linalg::gaussian_matrix(&mut rng, dim, n) * step;
            let tv = ratio(&red.m, &dual, &trial);
            if tv > value {
                value = tv;
                b = linalg::orthonormal_columns(&trial);
                if b.ncols() < n {
                    break;
                }
                fails = 0;
            } else {
                fails += 1;
                if fails >= 12 {
                    step *= 0.5;
                    fails = 0;
                    if step < 1e-9 {
                        break;
                    }
                }
            }
            if good_enough(value) {
                break;
            }
        }
        best = best.max(value);
        if good_enough(best) {
            break;
        }
    }
    best
}
