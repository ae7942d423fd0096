//! Dense Grassmannian grid for tiny polyhedral instances.
//!
//! Subspaces of dimension `k ≤ 2` in `R^m`, `m ≤ 4`, are parametrized by
//! angles: a line by its direction, a hyperplane by its normal, and a plane
//! in `R^4` by an orthonormal pair. The best grid point seeds a polish in the
//! same angle coordinates with finite-difference gradients, so nothing here
//! shares code with the subspace search except the LP-based trust step.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};

use super::inner::{self, Ball, InnerConfig};
use super::search::{self, Chart, Frame, Model, SlpConfig};
use super::{unreduce_subspace, width_bracket, Method, SearchConfig, WidthEstimate};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{Operator, Reduced};
use crate::spaces::{NormKind, Subspace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSmallConfig {
    pub points_per_angle: usize,
    /// Total grid size; the per-angle count shrinks to respect it.
    pub grid_cap: usize,
    pub polish_starts: usize,
    /// Largest admissible domain extreme set.
    pub max_points: usize,
}

impl Default for ExactSmallConfig {
    fn default() -> Self {
        ExactSmallConfig { points_per_angle: 720, grid_cap: 518_400, polish_starts: 8, max_points: 4096 }
    }
}

const MAX_CODOMAIN: usize = 4;
const MAX_INDEX: usize = 3;

#[derive(Debug, Clone, Copy)]
enum Param {
    /// Line through the unit vector with `m − 1` hyperspherical angles.
    Line(usize),
    /// Hyperplane with the given normal.
    Normal(usize),
    /// Plane in `R^4`: a direction (3 angles) and a direction in its complement (2 angles).
    Pair4,
}

impl Param {
    fn nangles(self) -> usize {
        match self {
            Param::Line(m) | Param::Normal(m) => m - 1,
            Param::Pair4 => 5,
        }
    }

    fn frame(self, a: &[f64]) -> DMatrix<f64> {
        match self {
            Param::Line(m) => DMatrix::from_column_slice(m, 1, &sphere_point(a)),
            Param::Normal(m) => {
                let n = DMatrix::from_column_slice(m, 1, &sphere_point(a));
                linalg::complement(&n)
            }
            Param::Pair4 => {
                let u1 = DVector::from_vec(sphere_point(&a[..3]));
                let q = linalg::complement(&DMatrix::from_column_slice(4, 1, u1.as_slice()));
                let u2 = &q * DVector::from_vec(sphere_point(&a[3..]));
                let mut u = DMatrix::zeros(4, 2);
                u.set_column(0, &u1);
                u.set_column(1, &u2);
                u
            }
        }
    }
}

/// Hyperspherical coordinates: `cos φ1, sin φ1 cos φ2, …, sin φ1⋯sin φ_{p}`.
fn sphere_point(a: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(a.len() + 1);
    let mut s = 1.0;
    for &phi in a {
        x.push(s * libm::cos(phi));
        s *= libm::sin(phi);
    }
    x.push(s);
    x
}

struct AngleChart<'a> {
    red: &'a Reduced,
    ball: &'a Ball,
    images: &'a DMatrix<f64>,
    param: Param,
    inner: InnerConfig,
}

impl AngleChart<'_> {
    fn residuals(&self, a: &[f64]) -> Result<Vec<f64>> {
        let u = self.param.frame(a);
        let n = self.images.ncols();
        if self.red.codomain == NormKind::P2 {
            let resid = self.images - &u * (u.transpose() * self.images);
            return Ok((0..n).map(|j| resid.column(j).norm()).collect());
        }
        (0..n).map(|j| inner::dist(self.red.codomain, &self.images.column(j).clone_owned(), &u)).collect()
    }
}

impl Chart for AngleChart<'_> {
    type Point = Vec<f64>;

    fn nparams(&self, p: &Vec<f64>) -> usize {
        p.len()
    }

    fn model(&self, p: &Vec<f64>, radius: f64) -> Result<Model> {
        let f0 = self.residuals(p)?;
        let fmax = f0.iter().fold(0.0f64, |a, b| a.max(*b));
        let vmax = (0..self.images.ncols()).fold(0.0f64, |a, j| a.max(self.images.column(j).norm()));
        let band = 4.0 * radius * vmax * libm::sqrt(p.len() as f64 * self.red.m.nrows() as f64);
        let mut active: Vec<usize> = (0..f0.len()).filter(|&j| f0[j] >= fmax - band).collect();
        active.sort_by(|&a, &b| f0[b].total_cmp(&f0[a]).then(a.cmp(&b)));
        active.truncate(64);
        let h = 1e-7;
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p.len());
        for i in 0..p.len() {
            let mut plus = p.clone();
            let mut minus = p.clone();
            plus[i] += h;
            minus[i] -= h;
            let fp = self.residuals(&plus)?;
            let fm = self.residuals(&minus)?;
            cols.push(active.iter().map(|&j| (fp[j] - fm[j]) / (2.0 * h)).collect());
        }
        let grads = (0..active.len()).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        Ok(Model { value: fmax, f: active.iter().map(|&j| f0[j]).collect(), grads })
    }

    fn value(&self, p: &Vec<f64>) -> Result<f64> {
        let u = self.param.frame(p);
        Ok(inner::quotient(self.red, self.ball, &u, &self.inner)?.value)
    }

    fn step(&self, p: &Vec<f64>, d: &[f64]) -> Vec<f64> {
        p.iter().zip(d).map(|(a, b)| a + b).collect()
    }
}

/// Global minimum of the quotient norm over a uniform angle grid, polished
/// locally. Requires a polyhedral domain, codomain dimension ≤ 4 and `n ≤ 3`.
pub fn widths_exact_small(t: &Operator, n: usize, cfg: &ExactSmallConfig) -> Result<WidthEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("width index starts at 1".into()));
    }
    if !t.domain().norm.is_polyhedral() {
        return Err(Error::NotPolyhedral);
    }
    if t.rows() > MAX_CODOMAIN {
        return Err(Error::SizeCap("exact-small search needs codomain dimension at most 4"));
    }
    if n > MAX_INDEX {
        return Err(Error::SizeCap("exact-small search needs n at most 3"));
    }
    let red = t.reduced();
    let scfg = SearchConfig::default();
    let icfg = scfg.inner(0);
    inner::check_cap(&red, &icfg)?;
    let ball = Ball::new(&red, scfg.sign_cap);
    let Ball::Finite { images, .. } = &ball else { return Err(Error::NotPolyhedral) };
    if images.ncols() > cfg.max_points {
        return Err(Error::SizeCap("exact-small search needs a small domain extreme set"));
    }
    let m = t.rows();
    let k = n - 1;
    let (bracket_lo, _) = width_bracket(t, n);
    let done = |value: f64, lower: f64, witness: Subspace| WidthEstimate {
        index: n,
        lower: lower.min(value),
        upper: value,
        witness: Some(witness),
        certified: true,
        method: Method::ExactSmall,
    };
    if k == 0 {
        let (v, _) = inner::operator_norm(&red, &icfg)?;
        return Ok(done(v, v, Subspace::zero(m)));
    }
    if k >= m {
        return Ok(done(0.0, 0.0, Subspace::span(&DMatrix::identity(m, m))));
    }
    let param = match (k, m) {
        (1, _) => Param::Line(m),
        (j, _) if j + 1 == m => Param::Normal(m),
        _ => Param::Pair4,
    };
    let chart = AngleChart { red: &red, ball: &ball, images, param, inner: icfg };

    let p = param.nangles();
    let cap = if red.codomain == NormKind::P2 { cfg.grid_cap } else { cfg.grid_cap / 32 };
    let mut g = cfg.points_per_angle.max(2);
    while g > 2 && g.checked_pow(p as u32).map_or(true, |v| v > cap) {
        g -= 1;
    }
    let step = PI / g as f64;
    let total = g.pow(p as u32);
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let keep = cfg.polish_starts.max(1);
    let mut angles = vec![0.0; p];
    for idx in 0..total {
        let mut r = idx;
        for a in angles.iter_mut() {
            *a = (r % g) as f64 * step;
            r /= g;
        }
        let v = chart.residuals(&angles)?.into_iter().fold(0.0f64, f64::max);
        if best.len() < keep || v < best[best.len() - 1].0 {
            let pos = best.partition_point(|(b, _)| *b <= v);
            best.insert(pos, (v, angles.clone()));
            best.truncate(keep);
        }
    }

    let slp_cfg = SlpConfig { max_iters: 200, stall_tol: 1e-14, rho0: step, rho_max: 4.0 * step, rho_min: 1e-13 };
    let mut winner: Option<(f64, DMatrix<f64>)> = None;
    for (_, a0) in best {
        let (a, _) = search::slp(&chart, a0, &slp_cfg)?;
        let u = param.frame(&a);
        let v = inner::quotient(&red, &ball, &u, &icfg)?.value;
        if winner.as_ref().map_or(true, |(w, _)| v < *w) {
            winner = Some((v, u));
        }
    }
    let (value, u) = winner.expect("grid is nonempty");
    let mut lower = bracket_lo;
    if red.codomain == NormKind::P2 {
        lower = lower.max(search::dual_lower(images, &Frame::new(u.clone())));
    }
    if lower < value * (1.0 - 1e-12) {
        lower = lower.max(super::bernstein::bernstein_lower(&red, n, &SearchConfig::default(), n as u64, value));
    }
    Ok(done(value, lower, unreduce_subspace(t, &u)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::NormSpec;
    use crate::widths::operator_norm;
    use approx::assert_abs_diff_eq;

    fn cfg() -> ExactSmallConfig {
        // coarser grid keeps debug-mode tests quick; the polish recovers accuracy
        ExactSmallConfig { points_per_angle: 180, ..ExactSmallConfig::default() }
    }

    #[test]
    fn diag321_line() {
        let t = Operator::with_norms(
            DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0])),
            NormSpec::p1(),
            NormSpec::p2(),
        )
        .unwrap();
        let e = widths_exact_small(&t, 2, &cfg()).unwrap();
        assert_abs_diff_eq!(e.upper, 6.0 / libm::sqrt(13.0), epsilon = 1e-9);
        assert!(e.lower <= e.upper);
        // the balance argument: optimal line lies in the e1–e2 plane
        let b = e.witness.unwrap();
        assert!(libm::fabs(b.basis()[(2, 0)]) < 1e-6);
    }

    #[test]
    fn n1_is_norm_and_rank1_vanishes() {
        let mut rng = linalg::rng(5, 0);
        let m = linalg::gaussian_matrix(&mut rng, 3, 3);
        let t = Operator::with_norms(m, NormSpec::pinf(), NormSpec::p2()).unwrap();
        assert_abs_diff_eq!(widths_exact_small(&t, 1, &cfg()).unwrap().upper, operator_norm(&t), epsilon = 1e-12);
        let r1 = DMatrix::from_fn(3, 3, |i, j| (i + 1) as f64 * (j as f64 - 1.5));
        let t = Operator::with_norms(r1, NormSpec::p1(), NormSpec::p2()).unwrap();
        assert!(widths_exact_small(&t, 2, &cfg()).unwrap().upper < 1e-9);
    }

    #[test]
    fn caps() {
        let t = Operator::euclidean(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(widths_exact_small(&t, 2, &cfg()), Err(Error::NotPolyhedral));
        let t = Operator::with_norms(DMatrix::identity(5, 5), NormSpec::p1(), NormSpec::p2()).unwrap();
        assert!(matches!(widths_exact_small(&t, 2, &cfg()), Err(Error::SizeCap(_))));
        let t = Operator::with_norms(DMatrix::identity(3, 3), NormSpec::p1(), NormSpec::p2()).unwrap();
        assert!(matches!(widths_exact_small(&t, 4, &cfg()), Err(Error::SizeCap(_))));
    }

    #[test]
    fn plane_in_four_dims() {
        // identity under p1 → p2 in R^4: the best plane leaves each e_j at distance √(1/2)
        let t = Operator::with_norms(DMatrix::identity(4, 4), NormSpec::p1(), NormSpec::p2()).unwrap();
        let small = ExactSmallConfig { points_per_angle: 12, ..ExactSmallConfig::default() };
        let e = widths_exact_small(&t, 3, &small).unwrap();
        assert_abs_diff_eq!(e.upper, libm::sqrt(0.5), epsilon = 1e-6);
    }
}
