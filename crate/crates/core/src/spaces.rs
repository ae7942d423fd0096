//! Finite-dimensional normed spaces: weighted ℓ1 / ℓ2 / ℓ∞ norms, unit-ball
//! extreme points, best approximation from a subspace and norm-equivalence
//! constants.
//!
//! A weighted norm is `‖x‖ = ‖(w_i x_i)_i‖_p`. All weighted problems are solved
//! by moving to the unweighted coordinates `W x`, where the diagonal scaling is
//! an isometry.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp;

/// Default cap on the dimension for ℓ∞ sign-vector enumeration.
pub const SIGN_CAP: usize = 20;
/// Fit tolerance for Euclidean projections.
pub const TAU_FIT_P2: f64 = 1e-10;
/// Fit tolerance for the ℓ1 / ℓ∞ linear programs.
pub const TAU_FIT_LP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    P1,
    P2,
    PInf,
}

impl NormKind {
    pub fn dual(self) -> NormKind {
        match self {
            NormKind::P1 => NormKind::PInf,
            NormKind::P2 => NormKind::P2,
            NormKind::PInf => NormKind::P1,
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    fn inverse_exponent(self) -> f64 {
        match self {
            NormKind::P1 => 1.0,
            NormKind::P2 => 0.5,
            NormKind::PInf => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormKind::P1 => "p1",
            NormKind::P2 => "p2",
            NormKind::PInf => "pinf",
        }
    }

    /// Unweighted norm of a slice.
    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            NormKind::P1 => v.iter().map(|x| x.abs()).sum(),
            NormKind::P2 => libm::sqrt(v.iter().map(|x| x * x).sum()),
            NormKind::PInf => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        }
    }
}

impl core::str::FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" | "l1" | "1" => Ok(NormKind::P1),
            "p2" | "l2" | "2" => Ok(NormKind::P2),
            "pinf" | "linf" | "inf" => Ok(NormKind::PInf),
            other => Err(Error::InvalidParameter(format!("unknown norm kind `{other}`"))),
        }
    }
}

/// A (possibly weighted) p-norm, p ∈ {1, 2, ∞}.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSpec {
    kind: NormKind,
    weights: Option<Vec<f64>>,
}

impl NormSpec {
    pub fn new(kind: NormKind) -> Self {
        NormSpec { kind, weights: None }
    }

    pub fn p1() -> Self {
        Self::new(NormKind::P1)
    }

    pub fn p2() -> Self {
        Self::new(NormKind::P2)
    }

    pub fn pinf() -> Self {
        Self::new(NormKind::PInf)
    }

    pub fn weighted(kind: NormKind, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidWeights(format!("weight {w} is not a positive finite number")));
        }
        Ok(NormSpec { kind, weights: Some(weights) })
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn is_polyhedral(&self) -> bool {
        self.kind != NormKind::P2
    }

    /// Checks that the norm can be used on a space of dimension `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match &self.weights {
            Some(w) if w.len() != dim => Err(Error::DimensionMismatch { expected: dim, found: w.len() }),
            _ => Ok(()),
        }
    }

    /// Weight of coordinate `i` (1 when unweighted).
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    /// Maps `v` to unweighted coordinates `W v`.
    pub fn scale(&self, v: &[f64]) -> Vec<f64> {
        v.iter().enumerate().map(|(i, x)| x * self.weight(i)).collect()
    }

    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v.len())?;
        Ok(self.kind.eval(&self.scale(v)))
    }

    /// Dual norm of the functional `f`: `sup { f·x : ‖x‖ ≤ 1 }`.
    pub fn dual_norm(&self, f: &[f64]) -> Result<f64> {
        self.check_dim(f.len())?;
        let g: Vec<f64> = f.iter().enumerate().map(|(i, x)| x / self.weight(i)).collect();
        Ok(self.kind.dual().eval(&g))
    }
}

/// Weighted p-norm of `v`.
pub fn norm(v: &[f64], spec: &NormSpec) -> Result<f64> {
    spec.norm(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceModel {
    pub dim: usize,
    pub norm: NormSpec,
}

impl SpaceModel {
    pub fn new(dim: usize, norm: NormSpec) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("space dimension must be at least 1".into()));
        }
        norm.check_dim(dim)?;
        Ok(SpaceModel { dim, norm })
    }
}

/// A linear subspace, stored through a Euclidean-orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Span of the columns of `vectors` (re-orthonormalized, rank-revealing).
    pub fn span(vectors: &DMatrix<f64>) -> Self {
        Subspace { ambient_dim: vectors.nrows(), basis: linalg::orthonormal_columns(vectors) }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: DMatrix::zeros(ambient_dim, 0) }
    }

    pub fn from_vectors(ambient_dim: usize, vectors: &[DVector<f64>]) -> Result<Self> {
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: v.len() });
            }
        }
        Ok(Self::span(&linalg::from_columns(ambient_dim, vectors)))
    }


    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthogonal projector onto the span.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }
}

/// Extreme points of the closed unit ball (one representative per ± pair for
/// ℓ∞, both signs for ℓ1).
pub fn extreme_points(spec: &NormSpec, dim: usize) -> Result<Vec<DVector<f64>>> {
    extreme_points_capped(spec, dim, SIGN_CAP)
}

pub fn extreme_points_capped(spec: &NormSpec, dim: usize, sign_cap: usize) -> Result<Vec<DVector<f64>>> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    spec.check_dim(dim)?;
    match spec.kind {
        NormKind::P2 => Err(Error::NotPolyhedral),
        NormKind::P1 => {
            let mut pts = Vec::with_capacity(2 * dim);
            for j in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut v = DVector::zeros(dim);
                    v[j] = sign / spec.weight(j);
                    pts.push(v);
                }
            }
            Ok(pts)
        }
        NormKind::PInf => {
            if dim > sign_cap {
                return Err(Error::CapExceeded { dim, cap: sign_cap });
            }
            Ok(sign_vectors(dim).map(|s| DVector::from_fn(dim, |i, _| s[i] / spec.weight(i))).collect())
        }
    }
}

/// Sign vectors with first entry `+1`, in binary counting order.
pub(crate) fn sign_vectors(dim: usize) -> impl Iterator<Item = Vec<f64>> {
    let count = 1usize << (dim - 1);
    (0..count).map(move |mask| {
        (0..dim)
            .map(|i| if i == 0 || (mask >> (i - 1)) & 1 == 0 { 1.0 } else { -1.0 })
            .collect()
    })
}

/// Result of a best-approximation solve.
#[derive(Debug, Clone)]
pub struct Fit {
    pub distance: f64,
    /// Coefficients with respect to the subspace's stored basis.
    pub coeffs: DVector<f64>,
}

/// `min_a ‖y − basis·a‖_spec`.
pub fn distance_to_subspace(y: &[f64], s: &Subspace, spec: &NormSpec) -> Result<Fit> {
    if y.len() != s.ambient_dim {
        return Err(Error::DimensionMismatch { expected: s.ambient_dim, found: y.len() });
    }
    spec.check_dim(y.len())?;
    let wy = DVector::from_vec(spec.scale(y));
    let mut wb = s.basis.clone();
    for i in 0..wb.nrows() {
        let w = spec.weight(i);
        wb.row_mut(i).scale_mut(w);
    }
    let fit = best_fit(spec.kind, &wy, &wb)?;
    Ok(Fit { distance: fit.distance, coeffs: fit.coeffs })
}

/// Unweighted best fit with a dual certificate.
#[derive(Debug, Clone)]
pub(crate) struct DualFit {
    pub distance: f64,
    pub coeffs: DVector<f64>,
    /// `ξ` in the dual unit ball with `bᵀξ = 0` and `ξ·y = distance`.
    pub dual: DVector<f64>,
}

/// Best approximation of `y` from the span of the columns of `b` in the
/// unweighted `kind` norm.
pub(crate) fn best_fit(kind: NormKind, y: &DVector<f64>, b: &DMatrix<f64>) -> Result<DualFit> {
    let m = y.len();
    let k = b.ncols();
    if k == 0 {
        let d = kind.eval(y.as_slice());
        return Ok(DualFit { distance: d, coeffs: DVector::zeros(0), dual: norm_subgradient(kind, y) });
    }
    let a0 = least_squares(b, y);
    let r0 = y - b * &a0;
    match kind {
        NormKind::P2 => {
            let d = r0.norm();
            let dual = if d > 0.0 { &r0 / d } else { DVector::zeros(m) };
            Ok(DualFit { distance: d, coeffs: a0, dual })
        }
        NormKind::PInf => pinf_fit(y, b, a0, r0),
        NormKind::P1 => p1_fit(y, b, a0, r0),
    }
}

fn least_squares(b: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let a = linalg::lstsq(b, y, 1e-14);
    // one step of iterative refinement
    let r = y - b * &a;
    let da = linalg::lstsq(b, &r, 1e-14);
    a + da
}

fn norm_subgradient(kind: NormKind, y: &DVector<f64>) -> DVector<f64> {
    let m = y.len();
    match kind {
        NormKind::P2 => {
            let n = y.norm();
            if n > 0.0 { y / n } else { DVector::zeros(m) }
        }
        NormKind::P1 => y.map(|v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 }),
        NormKind::PInf => {
            let mut xi = DVector::zeros(m);
            if let Some((i, v)) = y.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())) {
                if *v != 0.0 {
                    xi[i] = v.signum();
                }
            }
            xi
        }
    }
}

/// Chebyshev fit as a packing LP around the least-squares start
/// `a = a0 + δ⁺ − δ⁻`, `s = s0 − u`.
fn pinf_fit(y: &DVector<f64>, b: &DMatrix<f64>, a0: DVector<f64>, r0: DVector<f64>) -> Result<DualFit> {
    let m = y.len();
    let k = b.ncols();
    let s0 = r0.amax();
    if s0 == 0.0 {
        return Ok(DualFit { distance: 0.0, coeffs: a0, dual: DVector::zeros(m) });
    }
    let n = 2 * k + 1;
    let mut a = vec![0.0; 2 * m * n];
    let mut rhs = vec![0.0; 2 * m];
    for i in 0..m {
        let up = 2 * i;
        let dn = 2 * i + 1;
        for j in 0..k {
            let bij = b[(i, j)];
            // r_i(δ) = r0_i − b_i·δ ≤ s0 − u
            a[up * n + j] = -bij;
            a[up * n + k + j] = bij;
            // −r_i(δ) ≤ s0 − u
            a[dn * n + j] = bij;
            a[dn * n + k + j] = -bij;
        }
        a[up * n + 2 * k] = 1.0;
        a[dn * n + 2 * k] = 1.0;
        rhs[up] = (s0 - r0[i]).max(0.0);
        rhs[dn] = (s0 + r0[i]).max(0.0);
    }
    let mut c = vec![0.0; n];
    c[2 * k] = 1.0;
    let sol = lp::maximize(&c, &a, &rhs).map_err(|e| match e {
        Error::SolverFailure { .. } => Error::SolverFailure { bound: s0 },
        other => other,
    })?;
    let delta = DVector::from_fn(k, |j, _| sol.x[j] - sol.x[k + j]);
    let coeffs = a0 + delta;
    let resid = y - b * &coeffs;
    let distance = resid.amax();
    let dual = DVector::from_fn(m, |i, _| sol.duals[2 * i] - sol.duals[2 * i + 1]);
    Ok(DualFit { distance, coeffs, dual })
}

/// ℓ1 fit as a packing LP: `t_i = ‖r0‖_1 − u_i`.
fn p1_fit(y: &DVector<f64>, b: &DMatrix<f64>, a0: DVector<f64>, r0: DVector<f64>) -> Result<DualFit> {
    let m = y.len();
    let k = b.ncols();
    let total: f64 = r0.iter().map(|v| v.abs()).sum();
    if total == 0.0 {
        return Ok(DualFit { distance: 0.0, coeffs: a0, dual: DVector::zeros(m) });
    }
    let n = 2 * k + m;
    let mut a = vec![0.0; 2 * m * n];
    let mut rhs = vec![0.0; 2 * m];
    for i in 0..m {
        let up = 2 * i;
        let dn = 2 * i + 1;
        for j in 0..k {
            let bij = b[(i, j)];
            a[up * n + j] = -bij;
            a[up * n + k + j] = bij;
            a[dn * n + j] = bij;
            a[dn * n + k + j] = -bij;
        }
        a[up * n + 2 * k + i] = 1.0;
        a[dn * n + 2 * k + i] = 1.0;
        // any optimal residual component is bounded by the starting ℓ1 mass
        rhs[up] = (total - r0[i]).max(0.0);
        rhs[dn] = (total + r0[i]).max(0.0);
    }
    let mut c = vec![0.0; n];
    for i in 0..m {
        c[2 * k + i] = 1.0;
    }
    let sol = lp::maximize(&c, &a, &rhs).map_err(|e| match e {
        Error::SolverFailure { .. } => Error::SolverFailure { bound: total },
        other => other,
    })?;
    let delta = DVector::from_fn(k, |j, _| sol.x[j] - sol.x[k + j]);
    let coeffs = a0 + delta;
    let resid = y - b * &coeffs;
    let distance = resid.iter().map(|v| v.abs()).sum();
    let dual = DVector::from_fn(m, |i, _| (sol.duals[2 * i] - sol.duals[2 * i + 1]).clamp(-1.0, 1.0));
    Ok(DualFit { distance, coeffs, dual })
}

/// Smallest `C` with `‖x‖_from ≤ C ‖x‖_to` for all `x ∈ R^dim`.
///
/// With weights this is the `to → from` norm of the diagonal map
/// `D = W_from W_to⁻¹`: `max_i d_i` when `p_from ≥ p_to`, otherwise
/// `‖d‖_r` with `1/r = 1/p_from − 1/p_to`.
pub fn equivalence_constant(from: &NormSpec, to: &NormSpec, dim: usize) -> f64 {
    let d: Vec<f64> = (0..dim).map(|i| from.weight(i) / to.weight(i)).collect();
    let inv_r = from.kind.inverse_exponent() - to.kind.inverse_exponent();
    if inv_r <= 0.0 {
        d.iter().fold(0.0f64, |m, v| m.max(*v))
    } else if inv_r == 1.0 {
        d.iter().sum()
    } else {
        let r = 1.0 / inv_r;
        libm::pow(d.iter().map(|v| libm::pow(*v, r)).sum::<f64>(), inv_r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let g = (libm::sqrt(5.0) - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if f(a) < f(b) { hi = b } else { lo = a }
        }
        f(0.5 * (lo + hi))
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(&[0.0, 0.0, 0.0], &NormSpec::pinf()).unwrap(), 0.0);
        assert_eq!(norm(&[3.0, -4.0], &NormSpec::p2()).unwrap(), 5.0);
        let w = NormSpec::weighted(NormKind::P1, vec![2.0, 1.0]).unwrap();
        assert_eq!(norm(&[1.0, -2.0], &w).unwrap(), 4.0);
        assert!(matches!(norm(&[1.0], &w), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn weights_validated() {
        assert!(NormSpec::weighted(NormKind::P2, vec![1.0, 0.0]).is_err());
        assert!(NormSpec::weighted(NormKind::P2, vec![1.0, f64::NAN]).is_err());
        assert!(SpaceModel::new(0, NormSpec::p2()).is_err());
    }

    #[test]
    fn extreme_point_examples() {
        let p1 = extreme_points(&NormSpec::p1(), 2).unwrap();
        assert_eq!(p1.len(), 4);
        assert!(p1.contains(&DVector::from_vec(vec![-1.0, 0.0])));
        let inf = extreme_points(&NormSpec::pinf(), 2).unwrap();
        assert_eq!(inf, vec![DVector::from_vec(vec![1.0, 1.0]), DVector::from_vec(vec![1.0, -1.0])]);
        assert_eq!(extreme_points(&NormSpec::p2(), 3), Err(Error::NotPolyhedral));
        assert_eq!(extreme_points(&NormSpec::pinf(), 21), Err(Error::CapExceeded { dim: 21, cap: 20 }));
        assert_eq!(extreme_points(&NormSpec::pinf(), 20).unwrap().len(), 1 << 19);
    }

    #[test]
    fn distance_examples() {
        let s = Subspace::span(&DMatrix::from_row_slice(2, 1, &[1.0, 0.0]));
        let fit = distance_to_subspace(&[1.0, 1.0], &s, &NormSpec::p2()).unwrap();
        assert_abs_diff_eq!(fit.distance, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.coeffs[0], 1.0, epsilon = 1e-14);

        let diag = Subspace::span(&DMatrix::from_row_slice(2, 1, &[1.0, 1.0]));
        for spec in [NormSpec::p1(), NormSpec::p2(), NormSpec::pinf()] {
            let fit = distance_to_subspace(&[2.0, 2.0], &diag, &spec).unwrap();
            assert!(fit.distance < 1e-12);
        }
        let oracle = golden_min(|a| f64::max((1.0 - a).abs(), (-1.0 - a).abs()), -5.0, 5.0);
        let fit = distance_to_subspace(&[1.0, -1.0], &diag, &NormSpec::pinf()).unwrap();
        assert_abs_diff_eq!(fit.distance, oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.distance, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_subspace_distance_is_norm() {
        let s = Subspace::zero(3);
        let fit = distance_to_subspace(&[1.0, -2.0, 2.0], &s, &NormSpec::p1()).unwrap();
        assert_eq!(fit.distance, 5.0);
        assert_eq!(fit.coeffs.len(), 0);
    }

    #[test]
    fn weighted_p1_fit_against_scan() {
        let spec = NormSpec::weighted(NormKind::P1, vec![1.0, 3.0, 0.5]).unwrap();
        let s = Subspace::span(&DMatrix::from_row_slice(3, 1, &[1.0, 2.0, -1.0]));
        let y = [0.3, 1.0, 2.0];
        let u = s.basis().column(0).clone_owned();
        let oracle = golden_min(|a| norm(&[y[0] - a * u[0], y[1] - a * u[1], y[2] - a * u[2]], &spec).unwrap(), -10.0, 10.0);
        let fit = distance_to_subspace(&y, &s, &spec).unwrap();
        assert_abs_diff_eq!(fit.distance, oracle, epsilon = 1e-9);
    }

    #[test]
    fn equivalence_examples() {
        for k in 1..6 {
            assert_abs_diff_eq!(equivalence_constant(&NormSpec::p1(), &NormSpec::p2(), k), libm::sqrt(k as f64), epsilon = 1e-14);
            assert_eq!(equivalence_constant(&NormSpec::pinf(), &NormSpec::p2(), k), 1.0);
        }
        assert_abs_diff_eq!(equivalence_constant(&NormSpec::p2(), &NormSpec::pinf(), 4), 2.0, epsilon = 1e-14);
        assert_eq!(equivalence_constant(&NormSpec::p1(), &NormSpec::pinf(), 3), 3.0);
    }

    fn spec_strategy(dim: usize) -> impl Strategy<Value = NormSpec> {
        (0..3usize, proptest::option::of(proptest::collection::vec(0.1f64..5.0, dim))).prop_map(|(k, w)| {
            let kind = [NormKind::P1, NormKind::P2, NormKind::PInf][k];
            match w {
                Some(w) => NormSpec::weighted(kind, w).unwrap(),
                None => NormSpec::new(kind),
            }
        })
    }

    proptest! {
        #[test]
        fn norm_axioms(spec in spec_strategy(4),
                       x in proptest::collection::vec(-10.0f64..10.0, 4),
                       y in proptest::collection::vec(-10.0f64..10.0, 4),
                       alpha in -5.0f64..5.0) {
            let nx = norm(&x, &spec).unwrap();
            let ny = norm(&y, &spec).unwrap();
            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let scaled: Vec<f64> = x.iter().map(|a| alpha * a).collect();
            prop_assert!(nx >= 0.0);
            prop_assert!(norm(&sum, &spec).unwrap() <= (nx + ny) * (1.0 + 1e-12) + 1e-300);
            prop_assert!((norm(&scaled, &spec).unwrap() - alpha.abs() * nx).abs() <= 1e-12 * (1.0 + alpha.abs() * nx));
        }

        #[test]
        fn distance_is_optimal(spec in spec_strategy(5),
                               y in proptest::collection::vec(-3.0f64..3.0, 5),
                               basis in proptest::collection::vec(-1.0f64..1.0, 10),
                               z in proptest::collection::vec(-3.0f64..3.0, 2)) {
            let s = Subspace::span(&DMatrix::from_column_slice(5, 2, &basis));
            prop_assume!(s.dim() == 2);
            let fit = distance_to_subspace(&y, &s, &spec).unwrap();
            let cand = s.basis() * DVector::from_vec(z);
            let r: Vec<f64> = y.iter().zip(cand.iter()).map(|(a, b)| a - b).collect();
            prop_assert!(fit.distance <= norm(&r, &spec).unwrap() + TAU_FIT_LP);
            let attained = s.basis() * &fit.coeffs;
            let r: Vec<f64> = y.iter().zip(attained.iter()).map(|(a, b)| a - b).collect();
            prop_assert!((norm(&r, &spec).unwrap() - fit.distance).abs() <= 1e-12 * (1.0 + fit.distance));
        }

        #[test]
        fn p2_distance_is_projection_residual(y in proptest::collection::vec(-3.0f64..3.0, 4),
                                              basis in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let s = Subspace::span(&DMatrix::from_column_slice(4, 2, &basis));
            let yv = DVector::from_vec(y.clone());
            let resid = &yv - s.projector() * &yv;
            let fit = distance_to_subspace(&y, &s, &NormSpec::p2()).unwrap();
            prop_assert!((fit.distance - resid.norm()).abs() <= 1e-12);
        }

        #[test]
        fn extreme_points_realize_dual_norm(spec in spec_strategy(5),
                                            f in proptest::collection::vec(-4.0f64..4.0, 5)) {
            prop_assume!(spec.is_polyhedral());
            let pts = extreme_points(&spec, 5).unwrap();
            let best = pts.iter().map(|p| p.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>().abs()).fold(0.0, f64::max);
            prop_assert!((best - spec.dual_norm(&f).unwrap()).abs() <= 1e-12 * (1.0 + best));
        }
    }
}
