//! Dense helpers on top of `nalgebra`: orthonormalization, complements,
//! sorted singular systems and seeded Gaussian sampling.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative rank tolerance applied to the largest column norm.
pub const TAU_RANK: f64 = 1e-10;

/// Orthonormal basis of the column span, dropping columns whose residual
/// falls below `TAU_RANK * max column norm` (two-pass Gram–Schmidt).
pub fn orthonormal_columns(cols: &DMatrix<f64>) -> DMatrix<f64> {
    let m = cols.nrows();
    let scale = (0..cols.ncols()).fold(0.0f64, |s, j| s.max(cols.column(j).norm()));
    let tol = TAU_RANK * scale;
    let mut kept: Vec<DVector<f64>> = Vec::new();
    if scale == 0.0 {
        return DMatrix::zeros(m, 0);
    }
    for j in 0..cols.ncols() {
        let mut v = cols.column(j).clone_owned();
        for _ in 0..2 {
            for q in &kept {
                let d = q.dot(&v);
                v.axpy(-d, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv > tol {
            kept.push(v / nv);
        }
    }
    from_columns(m, &kept)
}

pub fn from_columns(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Orthonormal basis of the orthogonal complement of an orthonormal `u`.
pub fn complement(u: &DMatrix<f64>) -> DMatrix<f64> {
    let m = u.nrows();
    let k = u.ncols();
    let mut basis: Vec<DVector<f64>> = (0..k).map(|j| u.column(j).clone_owned()).collect();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(m - k.min(m));
    while basis.len() < m {
        // pick the coordinate axis with the largest residual
        let mut best: Option<DVector<f64>> = None;
        let mut best_norm = -1.0;
        for i in 0..m {
            let mut v = DVector::zeros(m);
            v[i] = 1.0;
            for _ in 0..2 {
                for q in &basis {
                    let d = q.dot(&v);
                    v.axpy(-d, q, 1.0);
                }
            }
            let nv = v.norm();
            if nv > best_norm {
                best_norm = nv;
                best = Some(v);
            }
        }
        let v = best.expect("ambient dimension is positive");
        let v = v / best_norm;
        basis.push(v.clone());
        out.push(v);
    }
    from_columns(m, &out)
}

/// Thin SVD `(u, sigma, v)` in no particular order.
///
/// nalgebra's bidiagonal SVD can return factors that do not reproduce the
/// input on rank-deficient matrices; such results are recomputed by
/// one-sided Jacobi.
pub fn thin_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(true, true);
    if let (Some(u), Some(vt)) = (svd.u, svd.v_t) {
        let sig: Vec<f64> = svd.singular_values.iter().copied().collect();
        let v = vt.transpose();
        if consistent(a, &u, &sig, &v) {
            return (u, sig, v);
        }
    }
    jacobi_svd(a)
}

fn consistent(a: &DMatrix<f64>, u: &DMatrix<f64>, sig: &[f64], v: &DMatrix<f64>) -> bool {
    if sig.iter().any(|s| !s.is_finite()) {
        return false;
    }
    let k = sig.len();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let tol = 1e-12 * (a.nrows().max(a.ncols()) as f64).max(1.0);
    let mut us = u.clone();
    for (j, s) in sig.iter().enumerate() {
        us.column_mut(j).scale_mut(*s);
    }
    let rec = (&us * v.transpose() - a).norm() / scale;
    let ou = (u.transpose() * u - DMatrix::identity(k, k)).norm();
    let ov = (v.transpose() * v - DMatrix::identity(k, k)).norm();
    rec <= tol && ou <= tol && ov <= tol
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    if a.nrows() < a.ncols() {
        let (u, s, v) = jacobi_svd(&a.transpose());
        return (v, s, u);
    }
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let (xp, xq) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * xp - s * xq;
                        mat[(i, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sig: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let top = sig.iter().fold(0.0f64, |x, y| x.max(*y));
    let mut kept: Vec<DVector<f64>> = Vec::new();
    let mut zero = Vec::new();
    for j in 0..n {
        if sig[j] > f64::EPSILON * top * n as f64 && sig[j] > 0.0 {
            kept.push(w.column(j) / sig[j]);
        } else {
            zero.push(j);
        }
    }
    // left vectors of negligible singular values complete the basis
    let mut u = from_columns(a.nrows(), &kept);
    let fill = complement(&u);
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    let (mut next_kept, mut next_fill) = (0, 0);
    for j in 0..n {
        if zero.contains(&j) {
            cols.push(fill.column(next_fill).clone_owned());
            next_fill += 1;
        } else {
            cols.push(u.column(next_kept).clone_owned());
            next_kept += 1;
        }
    }
    u = from_columns(a.nrows(), &cols);
    (u, sig, v)
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let (_, mut s, _) = thin_svd(a);
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Thin SVD sorted by non-increasing singular value: `(u, sigma, v)`.
pub fn sorted_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (u, s, v) = thin_svd(a);
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let sig = order.iter().map(|&i| s[i]).collect();
    (u.select_columns(&order), sig, v.select_columns(&order))
}

/// Minimum-norm least-squares solution, treating singular values `≤ eps`
/// as zero.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, eps: f64) -> DVector<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DVector::zeros(a.ncols());
    }
    let (u, s, v) = thin_svd(a);
    let mut coef = u.transpose() * b;
    for (c, sv) in coef.iter_mut().zip(&s) {
        *c = if *sv > eps { *c / sv } else { 0.0 };
    }
    v * coef
}

/// Numerical rank at `TAU_RANK` relative to the largest singular value.
pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&v| v > TAU_RANK * top).count(),
        _ => 0,
    }
}

/// Seeded stream: `(seed, stream)` pairs give independent, reproducible RNGs.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn uniform(rng: &mut impl RngCore) -> f64 {
    // 53 random bits in [0, 1)
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw via Box–Muller.
pub fn gaussian(rng: &mut impl RngCore) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}

pub fn gaussian_matrix(rng: &mut impl RngCore, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    // column-major fill keeps the draw order fixed
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// Haar-like random orthonormal frame of `k` columns in `R^m`.
pub fn random_frame(rng: &mut impl RngCore, m: usize, k: usize) -> DMatrix<f64> {
    loop {
        let g = gaussian_matrix(rng, m, k);
        let q = orthonormal_columns(&g);
        if q.ncols() == k {
            return q;
        }
    }
}
