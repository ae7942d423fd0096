//! Outer minimization over subspaces.
//!
//! The objective `S ↦ sup_x dist(Tx, S)` is a max of many functions of `S`.
//! Each iteration identifies the active (worst) unit-ball points and refits
//! the subspace against them by a trust-region linear program in a local
//! chart (sequential linear programming for minimax problems).

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::inner::{self, Ball, InnerConfig};
use super::SearchConfig;
use crate::error::Result;
use crate::linalg;
use crate::lp;
use crate::operator::Reduced;
use crate::spaces::{best_fit, NormKind};

/// Local model of the max-function at a chart center.
pub(crate) struct Model {
    /// True objective at the center.
    pub value: f64,
    pub f: Vec<f64>,
    /// Row `j` is the gradient of `f[j]` in chart coordinates.
    pub grads: Vec<Vec<f64>>,
}

pub(crate) trait Chart {
    type Point: Clone;
    fn nparams(&self, p: &Self::Point) -> usize;
    fn model(&self, p: &Self::Point, radius: f64) -> Result<Model>;
    fn value(&self, p: &Self::Point) -> Result<f64>;
    fn step(&self, p: &Self::Point, d: &[f64]) -> Self::Point;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SlpConfig {
    pub max_iters: usize,
    pub stall_tol: f64,
    pub rho0: f64,
    pub rho_max: f64,
    pub rho_min: f64,
}

/// Trust-region SLP for `min_p max_j f_j(p)`; returns the final point and value.
pub(crate) fn slp<C: Chart>(chart: &C, start: C::Point, cfg: &SlpConfig) -> Result<(C::Point, f64)> {
    let mut p = start;
    let mut rho = cfg.rho0;
    let mut model = chart.model(&p, rho)?;
    let mut value = model.value;
    let np = chart.nparams(&p);
    if np == 0 {
        return Ok((p, value));
    }
    for _ in 0..cfg.max_iters {
        if value <= 0.0 || model.f.is_empty() {
            break;
        }
        let Some((d, t)) = trust_step(&model, rho, np) else { break };
        let f_max = model.f.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        let predicted = f_max - t;
        if predicted <= cfg.stall_tol * value {
            break;
        }
        let trial = chart.step(&p, &d);
        let trial_value = chart.value(&trial)?;
        let actual = value - trial_value;
        if actual > 0.0 && actual >= 0.1 * predicted {
            p = trial;
            let at_boundary = d.iter().any(|x| x.abs() >= 0.99 * rho);
            if actual >= 0.75 * predicted && at_boundary {
                rho = (2.0 * rho).min(cfg.rho_max);
            }
        } else {
            rho *= 0.5;
            if rho < cfg.rho_min {
                break;
            }
        }
        model = chart.model(&p, rho)?;
        value = model.value;
    }
    Ok((p, value))
}

/// Solves `min t` s.t. `f_j + g_j·d ≤ t`, `|d_i| ≤ ρ` as a packing LP in
/// `e = d + ρ`, `u = t_max − t`.
fn trust_step(model: &Model, rho: f64, np: usize) -> Option<(Vec<f64>, f64)> {
    let scale = model.f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if scale == 0.0 {
        return None;
    }
    let f: Vec<f64> = model.f.iter().map(|v| v / scale).collect();
    let g: Vec<Vec<f64>> = model.grads.iter().map(|row| row.iter().map(|v| v / scale).collect()).collect();
    let nf = f.len();
    let nvar = np + 1;
    let mut tmax = f64::NEG_INFINITY;
    for j in 0..nf {
        let l1: f64 = g[j].iter().map(|v| v.abs()).sum();
        tmax = tmax.max(f[j] + rho * l1);
    }
    let rows = nf + np;
    let mut a = vec![0.0; rows * nvar];
    let mut b = vec![0.0; rows];
    for j in 0..nf {
        let row = &mut a[j * nvar..(j + 1) * nvar];
        row[..np].copy_from_slice(&g[j]);
        row[np] = 1.0;
        let gsum: f64 = g[j].iter().sum();
        b[j] = (tmax - f[j] + rho * gsum).max(0.0);
    }
    for i in 0..np {
        a[(nf + i) * nvar + i] = 1.0;
        b[nf + i] = 2.0 * rho;
    }
    let mut c = vec![0.0; nvar];
    c[np] = 1.0;
    let sol = lp::maximize(&c, &a, &b).ok()?;
    let d: Vec<f64> = sol.x[..np].iter().map(|e| (e - rho).clamp(-rho, rho)).collect();
    let t = (tmax - sol.x[np]) * scale;
    Some((d, t))
}

/// Point of the Grassmannian: orthonormal `u` (m×k) and its complement `q`.
#[derive(Debug, Clone)]
pub(crate) struct Frame {
    pub u: DMatrix<f64>,
    pub q: DMatrix<f64>,
}

impl Frame {
    pub fn new(u: DMatrix<f64>) -> Frame {
        let q = linalg::complement(&u);
        Frame { u, q }
    }
}

/// Normal-coordinate chart `U(Z) = qf(U + Q Z)` over the objective
/// (squared distances for Euclidean codomains).
pub(crate) struct GrassmannChart<'a> {
    pub red: &'a Reduced,
    pub ball: &'a Ball,
    pub inner: InnerConfig,
}

impl GrassmannChart<'_> {
    fn squared(&self) -> bool {
        self.red.codomain == NormKind::P2
    }

    /// Candidate worst images at `frame` for the local model.
    fn active_images(&self, frame: &Frame) -> Result<DMatrix<f64>> {
        match self.ball {
            Ball::Finite { images, .. } => Ok(images.clone()),
            Ball::Sphere if self.squared() => {
                let resid = &self.red.m - &frame.u * (frame.u.transpose() * &self.red.m);
                let (_, _, v) = linalg::sorted_svd(&resid);
                let take = v.ncols().min(8);
                Ok(&self.red.m * v.columns(0, take))
            }
            _ => {
                let sup = inner::quotient(self.red, self.ball, &frame.u, &self.inner)?;
                Ok(DMatrix::from_column_slice(self.red.m.nrows(), 1, (&self.red.m * &sup.worst).as_slice()))
            }
        }
    }
}

impl Chart for GrassmannChart<'_> {
    type Point = Frame;

    fn nparams(&self, p: &Frame) -> usize {
        p.q.ncols() * p.u.ncols()
    }

    fn model(&self, p: &Frame, radius: f64) -> Result<Model> {
        let images = self.active_images(p)?;
        let value = self.value(p)?;
        let k = p.u.ncols();
        let mk = p.q.ncols();
        let np = mk * k;
        let mut f = Vec::with_capacity(images.ncols());
        let mut grads = Vec::with_capacity(images.ncols());
        let vmax = (0..images.ncols()).fold(0.0f64, |a, j| a.max(images.column(j).norm()));
        if self.squared() {
            let c = p.u.transpose() * &images;
            let resid = &images - &p.u * &c;
            let qr = p.q.transpose() * &resid;
            let fs: Vec<f64> = (0..images.ncols()).map(|j| resid.column(j).norm_squared()).collect();
            let fmax = fs.iter().fold(0.0f64, |a, b| a.max(*b));
            let lip = 2.0 * libm::sqrt(np as f64) * vmax * vmax;
            let mut order: Vec<usize> = (0..fs.len()).filter(|&j| fs[j] >= fmax - 2.0 * radius * lip).collect();
            order.sort_by(|&a, &b| fs[b].total_cmp(&fs[a]).then(a.cmp(&b)));
            order.truncate(256);
            for j in order {
                let mut g = vec![0.0; np];
                for b in 0..k {
                    for a in 0..mk {
                        g[a + mk * b] = -2.0 * qr[(a, j)] * c[(b, j)];
                    }
                }
                f.push(fs[j]);
                grads.push(g);
            }
        } else {
            let mut fits = Vec::with_capacity(images.ncols());
            for j in 0..images.ncols() {
                fits.push(best_fit(self.red.codomain, &images.column(j).clone_owned(), &p.u)?);
            }
            let fmax = fits.iter().fold(0.0f64, |a, b| a.max(b.distance));
            let m = self.red.m.nrows() as f64;
            let lip = 2.0 * libm::sqrt(np as f64 * m) * vmax;
            let mut order: Vec<usize> =
                (0..fits.len()).filter(|&j| fits[j].distance >= fmax - 2.0 * radius * lip).collect();
            order.sort_by(|&a, &b| fits[b].distance.total_cmp(&fits[a].distance).then(a.cmp(&b)));
            order.truncate(256);
            for j in order {
                let qxi = p.q.transpose() * &fits[j].dual;
                let mut g = vec![0.0; np];
                for b in 0..k {
                    for a in 0..mk {
                        g[a + mk * b] = -qxi[a] * fits[j].coeffs[b];
                    }
                }
                f.push(fits[j].distance);
                grads.push(g);
            }
        }
        Ok(Model { value, f, grads })
    }

    fn value(&self, p: &Frame) -> Result<f64> {
        let v = inner::quotient(self.red, self.ball, &p.u, &self.inner)?.value;
        Ok(if self.squared() { v * v } else { v })
    }

    fn step(&self, p: &Frame, d: &[f64]) -> Frame {
        let k = p.u.ncols();
        let mk = p.q.ncols();
        let z = DMatrix::from_column_slice(mk, k, d);
        let moved = &p.u + &p.q * z;
        let u = linalg::orthonormal_columns(&moved);
        if u.ncols() < k {
            return p.clone();
        }
        Frame::new(u)
    }
}

/// Lagrangian lower bound for Euclidean codomains over a finite point set:
/// for any `λ` in the simplex, `d² ≥ min_S Σ λ_j dist(v_j, S)²`, the sum of
/// the trailing `m − k` eigenvalues of `Σ λ_j v_j v_jᵀ`. The multipliers are
/// recovered from the stationarity condition at `frame`.
pub(crate) fn dual_lower(images: &DMatrix<f64>, frame: &Frame) -> f64 {
    let k = frame.u.ncols();
    let mk = frame.q.ncols();
    let np = mk * k;
    if k == 0 || mk == 0 || images.ncols() == 0 {
        return 0.0;
    }
    let c = frame.u.transpose() * images;
    let resid = images - &frame.u * &c;
    let qr = frame.q.transpose() * &resid;
    let fs: Vec<f64> = (0..images.ncols()).map(|j| resid.column(j).norm_squared()).collect();
    let fmax = fs.iter().fold(0.0f64, |a, b| a.max(*b));
    if fmax == 0.0 {
        return 0.0;
    }
    let mut best = 0.0f64;
    for rel in [1e-10, 1e-8, 1e-6, 1e-4, 1e-2] {
        let active: Vec<usize> = (0..fs.len()).filter(|&j| fs[j] >= fmax * (1.0 - rel)).take(64).collect();
        let na = active.len();
        let mut e = DMatrix::zeros(np + 1, na);
        let mut gscale = 0.0f64;
        for (col, &j) in active.iter().enumerate() {
            for b in 0..k {
                for a in 0..mk {
                    let g = -2.0 * qr[(a, j)] * c[(b, j)];
                    e[(a + mk * b, col)] = g;
                    gscale = gscale.max(g.abs());
                }
            }
        }
        let big = 1e3 * gscale.max(fmax);
        for col in 0..na {
            e[(np, col)] = big;
        }
        let mut rhs = DVector::zeros(np + 1);
        rhs[np] = big;
        let lam = lp::nnls(&e, &rhs);
        let total: f64 = lam.iter().sum();
        if !(total > 0.0) {
            continue;
        }
        let m = images.nrows();
        let mut gram = DMatrix::zeros(m, m);
        for (col, &j) in active.iter().enumerate() {
            let w = lam[col] / total;
            if w > 0.0 {
                let v = images.column(j);
                gram.ger(w, &v, &v, 1.0);
            }
        }
        let mut eig: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let tail: f64 = eig[k.min(m)..].iter().map(|v| v.max(0.0)).sum();
        best = best.max(tail);
    }
    libm::sqrt(best.min(fmax))
}

/// Lexicographic `k`-subsets of `0..n`, at most `cap` of them.
pub(crate) fn subsets(n: usize, k: usize, cap: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n || k == 0 {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    while out.len() < cap {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else { break };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

/// Result of a restarted search for a fixed subspace dimension.
pub(crate) struct SearchOutcome {
    pub value: f64,
    pub certified: bool,
    pub frame: Frame,
    pub lower: f64,
}

/// `min_{dim S = k} sup_x dist(Mx, S)` by restarted SLP; `known_lower` allows
/// stopping once the gap is closed.
pub(crate) fn search(red: &Reduced, k: usize, cfg: &SearchConfig, stream: u64, known_lower: f64) -> Result<SearchOutcome> {
    let m = red.m.nrows();
    let inner_cfg = cfg.inner(stream);
    let ball = Ball::new(red, cfg.sign_cap);
    let chart = GrassmannChart { red, ball: &ball, inner: inner_cfg };
    let slp_cfg = SlpConfig { max_iters: cfg.max_iters, stall_tol: cfg.stall_tol, rho0: 0.2, rho_max: 1.0, rho_min: 1e-12 };
    let scale = inner::operator_norm(red, &inner_cfg)?.0.max(1e-300);
    let closed = |upper: f64, lower: f64| upper - lower <= 1e-12 * scale;

    let mut starts: Vec<DMatrix<f64>> = Vec::new();
    if cfg.spectral_init {
        let (u, _, _) = linalg::sorted_svd(&red.m);
        if u.ncols() >= k {
            starts.push(u.columns(0, k).clone_owned());
        }
    }
    let restarts = cfg.restarts.max(1);
    if cfg.column_init {
        let cap = if red.codomain == NormKind::P2 { cfg.subset_cap } else { cfg.subset_cap.min(256) };
        let mut screened: Vec<(f64, DMatrix<f64>)> = Vec::new();
        for subset in subsets(red.m.ncols(), k, cap) {
            let cols = red.m.select_columns(&subset);
            let u = linalg::orthonormal_columns(&cols);
            if u.ncols() < k {
                continue;
            }
            let v = inner::quotient(red, &ball, &u, &inner_cfg)?.value;
            screened.push((v, u));
        }
        screened.sort_by(|a, b| a.0.total_cmp(&b.0));
        let budget = restarts.saturating_sub(starts.len()) / 2;
        starts.extend(screened.into_iter().take(budget.max(1)).map(|(_, u)| u));
    }
    if cfg.random_init {
        let mut r = 0u64;
        while starts.len() < restarts {
            let mut rng = linalg::rng(cfg.seed, (stream << 16) | r);
            starts.push(linalg::random_frame(&mut rng, m, k));
            r += 1;
        }
    }

    let mut best: Option<SearchOutcome> = None;
    let mut lower = known_lower;
    for u0 in starts.into_iter().take(restarts.max(1)) {
        let (frame, _) = slp(&chart, Frame::new(u0), &slp_cfg)?;
        let sup = inner::quotient(red, &ball, &frame.u, &inner_cfg)?;
        if let Ball::Finite { images, .. } = &ball {
            if red.codomain == NormKind::P2 {
                lower = lower.max(dual_lower(images, &frame).min(sup.value));
            }
        }
        let better = best.as_ref().map_or(true, |b| sup.value < b.value);
        if better {
            best = Some(SearchOutcome { value: sup.value, certified: sup.certified, frame, lower });
        }
        if let Some(b) = &best {
            if cfg.stop_when_closed && b.certified && closed(b.value, lower) {
                break;
            }
        }
    }
    let mut out = best.expect("at least one start");
    out.lower = lower.min(out.value);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate() {
        assert_eq!(subsets(4, 2, 100).len(), 6);
        assert_eq!(subsets(4, 2, 100)[5], vec![2, 3]);
        assert_eq!(subsets(5, 3, 4).len(), 4);
        assert_eq!(subsets(3, 3, 10), vec![vec![0, 1, 2]]);
        assert!(subsets(2, 3, 10).is_empty());
    }
}
