//! Kolmogorov numbers `d_n(T) = inf { ‖Q_S T‖ : dim S < n }`.
//!
//! Three routes are provided:
//!
//! * [`widths_hilbert`]: singular values, exact for Euclidean norms;
//! * [`width_upper`]: restarted subspace search for any norm pair, with
//!   certified two-sided bounds whenever the inner supremum is exact;
//! * [`widths_exact_small`]: a dense Grassmannian grid for tiny polyhedral
//!   instances, used as an oracle.
//!
//! Lower bounds come from [`width_bracket`] (norm-equivalence constants) and,
//! for Euclidean codomains over polyhedral domains, from a Lagrangian dual
//! bound and from Bernstein-type bounds over `n`-dimensional domain
//! subspaces.

mod bernstein;
mod branch;
mod exact_small;
pub(crate) mod inner;
pub(crate) mod search;

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::Operator;
use crate::spaces::{equivalence_constant, NormKind, NormSpec, Subspace, SIGN_CAP};

pub use exact_small::{widths_exact_small, ExactSmallConfig};
use inner::{Ball, InnerConfig};

/// How a width estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Search,
    ExactSmall,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Search => "search",
            Method::ExactSmall => "exact-small",
        }
    }
}

/// Bounds on a single Kolmogorov number `d_index(T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthEstimate {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    /// Subspace of dimension `< index` attaining `upper`.
    pub witness: Option<Subspace>,
    /// `upper` is a true bound (the inner supremum was computed exactly).
    pub certified: bool,
    pub method: Method,
}

impl WidthEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Point estimate: the attained upper value.
    pub fn value(&self) -> f64 {
        self.upper
    }
}

/// Widths for `n = 1..=k`, with SN1 monotonicity enforced on both bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthSequence {
    estimates: Vec<WidthEstimate>,
}

impl WidthSequence {
    pub fn new(mut estimates: Vec<WidthEstimate>) -> Self {
        for i in 1..estimates.len() {
            if estimates[i].upper > estimates[i - 1].upper {
                estimates[i].upper = estimates[i - 1].upper;
                estimates[i].certified &= estimates[i - 1].certified;
            }
        }
        for i in (0..estimates.len().saturating_sub(1)).rev() {
            if estimates[i].lower < estimates[i + 1].lower {
                estimates[i].lower = estimates[i + 1].lower;
            }
        }
        for e in &mut estimates {
            if e.lower > e.upper {
                e.lower = e.upper;
            }
        }
        WidthSequence { estimates }
    }

    pub fn estimates(&self) -> &[WidthEstimate] {
        &self.estimates
    }

    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }

    /// Estimate for `d_n` (1-based).
    pub fn get(&self, n: usize) -> Option<&WidthEstimate> {
        n.checked_sub(1).and_then(|i| self.estimates.get(i))
    }

    pub fn uppers(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.upper).collect()
    }

    pub fn all_certified(&self) -> bool {
        self.estimates.iter().all(|e| e.certified)
    }
}

/// Tuning of the subspace search and inner suprema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub stall_tol: f64,
    pub seed: u64,
    pub sign_cap: usize,
    pub sign_restarts: usize,
    pub ascent_restarts: usize,
    pub subset_cap: usize,
    pub spectral_init: bool,
    pub column_init: bool,
    pub random_init: bool,
    /// Stop restarting once the certified upper bound meets the lower bound.
    pub stop_when_closed: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 64,
            max_iters: 200,
            stall_tol: 1e-12,
            seed: 0,
            sign_cap: SIGN_CAP,
            sign_restarts: 32,
            ascent_restarts: 8,
            subset_cap: 4096,
            spectral_init: true,
            column_init: true,
            random_init: true,
            stop_when_closed: true,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        SearchConfig { seed, ..Self::default() }
    }

    pub(crate) fn inner(&self, stream: u64) -> InnerConfig {
        InnerConfig {
            sign_cap: self.sign_cap,
            sign_restarts: self.sign_restarts,
            ascent_restarts: self.ascent_restarts,
            seed: self.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        }
    }
}

/// Operator norm with bounds; `lower = upper = value` when certified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNorm {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub certified: bool,
}

/// `sup_{‖x‖_X ≤ 1} ‖Tx‖_Y`.
pub fn operator_norm(t: &Operator) -> f64 {
    operator_norm_bounds(t, &SearchConfig::default()).value
}

pub fn operator_norm_bounds(t: &Operator, cfg: &SearchConfig) -> OperatorNorm {
    let red = t.reduced();
    match inner::operator_norm(&red, &cfg.inner(0)) {
        Ok((v, true)) => OperatorNorm { value: v, lower: v, upper: v, certified: true },
        Ok((v, false)) => {
            let (_, hi) = width_bracket(t, 1);
            OperatorNorm { value: v, lower: v, upper: hi.max(v), certified: false }
        }
        Err(_) => {
            let (lo, hi) = width_bracket(t, 1);
            OperatorNorm { value: hi, lower: lo, upper: hi, certified: false }
        }
    }
}

/// `‖Q_S T‖` with the maximizing domain point.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientNorm {
    pub value: f64,
    pub certified: bool,
    /// Domain vector on the unit sphere of `X` attaining `value`.
    pub worst: DVector<f64>,
}

/// `sup_{x ∈ B(X)} inf_{y ∈ S} ‖Tx − y‖_Y`.
///
/// Exact for polyhedral domains (within the sign cap) and for Euclidean
/// pairs; heuristic ascent otherwise. A ℓ∞ domain above the cap is reported
/// as `CapExceeded`; see [`quotient_norm_with`] for the heuristic fallback.
pub fn quotient_norm(t: &Operator, s: &Subspace) -> Result<QuotientNorm> {
    let cfg = SearchConfig::default();
    let red = t.reduced();
    inner::check_cap(&red, &cfg.inner(0))?;
    quotient_norm_with(t, s, &cfg)
}

pub fn quotient_norm_with(t: &Operator, s: &Subspace, cfg: &SearchConfig) -> Result<QuotientNorm> {
    if s.ambient_dim() != t.rows() {
        return Err(Error::DimensionMismatch { expected: t.rows(), found: s.ambient_dim() });
    }
    let red = t.reduced();
    let u = weighted_frame(t, s);
    let ball = Ball::new(&red, cfg.sign_cap);
    let sup = inner::quotient(&red, &ball, &u, &cfg.inner(0))?;
    Ok(QuotientNorm { value: sup.value, certified: sup.certified, worst: unreduce_domain(t, &sup.worst) })
}

/// Orthonormal basis of `W_Y S` in unweighted coordinates.
fn weighted_frame(t: &Operator, s: &Subspace) -> DMatrix<f64> {
    let mut b = s.basis().clone();
    for i in 0..b.nrows() {
        let w = t.codomain().norm.weight(i);
        b.row_mut(i).scale_mut(w);
    }
    linalg::orthonormal_columns(&b)
}

fn unreduce_domain(t: &Operator, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(x.len(), |j, _| x[j] / t.domain().norm.weight(j))
}

/// Subspace `W_Y⁻¹ span(u)` in original coordinates.
fn unreduce_subspace(t: &Operator, u: &DMatrix<f64>) -> Subspace {
    let mut b = u.clone();
    for i in 0..b.nrows() {
        let w = t.codomain().norm.weight(i);
        b.row_mut(i).scale_mut(1.0 / w);
    }
    Subspace::span(&b)
}

/// Kolmogorov numbers of a Euclidean (possibly weighted) operator: the
/// singular values of `W_Y T W_X⁻¹`.
pub fn widths_hilbert(t: &Operator, k: usize) -> Result<WidthSequence> {
    if !t.is_hilbert() {
        return Err(Error::WrongCase("widths_hilbert needs p2 norms on both sides"));
    }
    let red = t.reduced();
    let (u, sig, _) = linalg::sorted_svd(&red.m);
    let estimates = (1..=k)
        .map(|n| {
            let value = sig.get(n - 1).copied().unwrap_or(0.0);
            let r = (n - 1).min(u.ncols());
            let witness = if n - 1 <= u.ncols() {
                unreduce_subspace(t, &u.columns(0, r).clone_owned())
            } else {
                Subspace::span(&DMatrix::identity(t.rows(), t.rows()))
            };
            WidthEstimate { index: n, lower: value, upper: value, witness: Some(witness), certified: true, method: Method::Spectral }
        })
        .collect();
    Ok(WidthSequence::new(estimates))
}

/// Certified bracket from the Euclidean widths of the same matrix and the
/// identity maps between the declared norms and unweighted ℓ2.
pub fn width_bracket(t: &Operator, n: usize) -> (f64, f64) {
    let sig = linalg::singular_values(t.matrix());
    let d2 = n.checked_sub(1).and_then(|i| sig.get(i)).copied().unwrap_or(0.0);
    let p2 = NormSpec::p2();
    let (dx, dy) = (t.cols(), t.rows());
    let x = &t.domain().norm;
    let y = &t.codomain().norm;
    let upper = d2 * equivalence_constant(&p2, x, dx) * equivalence_constant(y, &p2, dy);
    let lower = d2 / (equivalence_constant(&p2, y, dy) * equivalence_constant(x, &p2, dx));
    (lower, upper)
}

/// Cells examined by the branch-and-bound lower bound per width.
const BRANCH_BUDGET: usize = 400_000;

/// Upper bound on `d_n` by restarted subspace search, with the best
/// available certified lower bound.
pub fn width_upper(t: &Operator, n: usize, cfg: &SearchConfig) -> Result<WidthEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("width index starts at 1".into()));
    }
    let (bracket_lo, bracket_hi) = width_bracket(t, n);
    let red = t.reduced();
    let k = n - 1;
    let rows = t.rows();
    let hilbert_value = if t.is_hilbert() { Some(widths_hilbert(t, n)?.get(n).map_or(0.0, |e| e.upper)) } else { None };
    let mut lower = bracket_lo;
    if let Some(h) = hilbert_value {
        lower = lower.max(h);
    }

    if k == 0 {
        let norm = operator_norm_bounds(t, cfg);
        let lo = lower.max(norm.lower).min(norm.value);
        return Ok(WidthEstimate {
            index: n,
            lower: lo,
            upper: norm.value,
            witness: Some(Subspace::zero(rows)),
            certified: norm.certified,
            method: Method::Search,
        });
    }
    if k >= rows || n > t.cols() {
        // the range of T itself has dimension ≤ k
        let span = if k >= rows { DMatrix::identity(rows, rows) } else { t.matrix().clone() };
        return Ok(WidthEstimate {
            index: n,
            lower: 0.0,
            upper: 0.0,
            witness: Some(Subspace::span(&span)),
            certified: true,
            method: Method::Search,
        });
    }
    let outcome = search::search(&red, k, cfg, n as u64, lower)?;
    let mut upper = outcome.value;
    if !outcome.certified {
        // a heuristic inner sup only underestimates the quotient norm
        upper = upper.max(lower).min(bracket_hi.max(lower));
    }
    let mut lower = lower.max(if outcome.certified { outcome.lower } else { 0.0 });
    if lower < upper * (1.0 - 1e-12) {
        lower = lower.max(bernstein::bernstein_lower(&red, n, cfg, n as u64, upper));
    }
    if outcome.certified && lower < upper * (1.0 - 1e-12) && red.codomain == NormKind::P2 {
        if let Ball::Finite { images, .. } = Ball::new(&red, cfg.sign_cap) {
            let tol = 1e-12 * upper;
            if let Some(b) = branch::branch_lower(&images, k, upper, tol, BRANCH_BUDGET) {
                lower = lower.max(b);
            }
        }
    }
    let lower = lower.min(upper);
    Ok(WidthEstimate {
        index: n,
        lower,
        upper,
        witness: Some(unreduce_subspace(t, &outcome.frame.u)),
        certified: outcome.certified,
        method: Method::Search,
    })
}

/// Certified `(lower, upper)` for an estimate of a width of `t`: a
/// heuristic upper value is replaced by the analytic bracket.
pub fn certified_bounds(t: &Operator, e: &WidthEstimate) -> (f64, f64) {
    let upper = if e.certified { e.upper } else { width_bracket(t, e.index).1.max(e.lower) };
    (e.lower.min(upper), upper)
}

/// Widths `d_1..d_k` by the exact spectral route when both norms are
/// Euclidean and by [`width_upper`] otherwise.
pub fn width_sequence(t: &Operator, k: usize, cfg: &SearchConfig) -> Result<WidthSequence> {
    if t.is_hilbert() {
        return widths_hilbert(t, k);
    }
    let mut estimates = Vec::with_capacity(k);
    for n in 1..=k {
        estimates.push(width_upper(t, n, cfg)?);
    }
    Ok(WidthSequence::new(estimates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::NormKind;
    use approx::assert_abs_diff_eq;

    fn diag321(domain: NormSpec) -> Operator {
        Operator::with_norms(DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![3.0, 2.0, 1.0])), domain, NormSpec::p2()).unwrap()
    }

    #[test]
    fn operator_norm_examples() {
        assert_abs_diff_eq!(operator_norm(&diag321(NormSpec::p2())), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(operator_norm(&diag321(NormSpec::p1())), 3.0, epsilon = 1e-12);
        let id = Operator::with_norms(DMatrix::identity(2, 2), NormSpec::pinf(), NormSpec::p2()).unwrap();
        assert_abs_diff_eq!(operator_norm(&id), libm::sqrt(2.0), epsilon = 1e-12);
    }

    #[test]
    fn operator_norm_dual_routes_agree() {
        // p2 -> p1 and p2 -> pinf are exact through the codomain dual ball
        let mut rng = linalg::rng(3, 0);
        let m = linalg::gaussian_matrix(&mut rng, 4, 3);
        for kind in [NormKind::P1, NormKind::PInf] {
            let t = Operator::with_norms(m.clone(), NormSpec::p2(), NormSpec::new(kind)).unwrap();
            let exact = operator_norm_bounds(&t, &SearchConfig::default());
            assert!(exact.certified);
            // dense sampling of the circle-free sphere never beats the exact value
            let mut r = linalg::rng(4, 0);
            for _ in 0..2000 {
                let x = DVector::from_fn(3, |_, _| linalg::gaussian(&mut r));
                let x = &x / x.norm();
                let y = &m * x;
                assert!(kind.eval(y.as_slice()) <= exact.value + 1e-12);
            }
        }
    }

    #[test]
    fn quotient_examples() {
        let t = diag321(NormSpec::p1());
        let full = Subspace::span(&DMatrix::identity(3, 3));
        assert!(quotient_norm(&t, &full).unwrap().value < 1e-14);
        let e1 = Subspace::span(&DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]));
        assert_abs_diff_eq!(quotient_norm(&t, &e1).unwrap().value, 2.0, epsilon = 1e-14);
        // direct projection arithmetic: residual of (3,0,0) and (0,2,0) off (3,2,0)/√13
        let s = Subspace::span(&DMatrix::from_column_slice(3, 1, &[3.0, 2.0, 0.0]));
        let u = [3.0 / libm::sqrt(13.0), 2.0 / libm::sqrt(13.0)];
        let r1 = libm::sqrt(9.0 - (3.0 * u[0]) * (3.0 * u[0]));
        let r2 = libm::sqrt(4.0 - (2.0 * u[1]) * (2.0 * u[1]));
        assert_abs_diff_eq!(r1, 6.0 / libm::sqrt(13.0), epsilon = 1e-14);
        assert_abs_diff_eq!(r2, 6.0 / libm::sqrt(13.0), epsilon = 1e-14);
        let q = quotient_norm(&t, &s).unwrap();
        assert!(q.certified);
        assert_abs_diff_eq!(q.value, r1.max(r2).max(1.0), epsilon = 1e-14);
    }

    #[test]
    fn quotient_cap() {
        let t = Operator::with_norms(DMatrix::identity(21, 21), NormSpec::pinf(), NormSpec::p2()).unwrap();
        assert!(matches!(quotient_norm(&t, &Subspace::zero(21)), Err(Error::CapExceeded { .. })));
        let q = quotient_norm_with(&t, &Subspace::zero(21), &SearchConfig::default()).unwrap();
        assert!(!q.certified);
        assert_abs_diff_eq!(q.value, libm::sqrt(21.0), epsilon = 1e-12);
    }

    #[test]
    fn hilbert_examples() {
        let seq = widths_hilbert(&diag321(NormSpec::p2()), 4).unwrap();
        let vals = seq.uppers();
        for (a, b) in vals.iter().zip([3.0, 2.0, 1.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        let zero = Operator::euclidean(DMatrix::zeros(3, 2)).unwrap();
        assert!(widths_hilbert(&zero, 3).unwrap().uppers().iter().all(|v| *v == 0.0));
        assert!(matches!(widths_hilbert(&diag321(NormSpec::p1()), 2), Err(Error::WrongCase(_))));
    }

    #[test]
    fn hilbert_weights_absorbed() {
        // ‖x‖ = ‖(2x1, x2)‖ on the domain: d_n = singular values of T W⁻¹
        let w = NormSpec::weighted(NormKind::P2, alloc::vec![2.0, 1.0]).unwrap();
        let t = Operator::with_norms(DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]), w, NormSpec::p2()).unwrap();
        let vals = widths_hilbert(&t, 2).unwrap().uppers();
        assert_abs_diff_eq!(vals[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn bracket_examples() {
        let (lo, hi) = width_bracket(&diag321(NormSpec::p2()), 2);
        assert_eq!((lo, hi), (2.0, 2.0));
        let (lo, hi) = width_bracket(&diag321(NormSpec::p1()), 2);
        assert_abs_diff_eq!(lo, 2.0 / libm::sqrt(3.0), epsilon = 1e-14);
        assert_abs_diff_eq!(hi, 2.0, epsilon = 1e-14);
        let target = 6.0 / libm::sqrt(13.0);
        assert!(lo <= target && target <= hi);
        let zero = Operator::with_norms(DMatrix::zeros(2, 2), NormSpec::p1(), NormSpec::pinf()).unwrap();
        assert_eq!(width_bracket(&zero, 1), (0.0, 0.0));
    }

    #[test]
    fn width_upper_examples() {
        let cfg = SearchConfig::default();
        let e = width_upper(&diag321(NormSpec::p2()), 2, &cfg).unwrap();
        assert_abs_diff_eq!(e.upper, 2.0, epsilon = 1e-6);

        let id = Operator::with_norms(DMatrix::identity(2, 2), NormSpec::pinf(), NormSpec::p2()).unwrap();
        let e = width_upper(&id, 2, &cfg).unwrap();
        assert_abs_diff_eq!(e.upper, 1.0, epsilon = 1e-9);

        let e = width_upper(&diag321(NormSpec::p1()), 2, &cfg).unwrap();
        assert!(e.certified);
        assert_abs_diff_eq!(e.upper, 6.0 / libm::sqrt(13.0), epsilon = 1e-9);
        assert_abs_diff_eq!(e.lower, 6.0 / libm::sqrt(13.0), epsilon = 1e-9);
        let w = e.witness.as_ref().unwrap();
        assert!(w.dim() < 2);
        assert_abs_diff_eq!(quotient_norm(&diag321(NormSpec::p1()), w).unwrap().value, e.upper, epsilon = 1e-10);
    }

    #[test]
    fn angle_grid_oracle_pinf_identity() {
        // best line for the square's vertices (1,1), (1,-1) under ℓ2 residuals
        let mut best = f64::INFINITY;
        for i in 0..36000 {
            let th = core::f64::consts::PI * i as f64 / 36000.0;
            let (c, s) = (libm::cos(th), libm::sin(th));
            let r1 = libm::fabs(-s + c);
            let r2 = libm::fabs(-s - c);
            best = best.min(r1.max(r2));
        }
        assert_abs_diff_eq!(best, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn sphere_domain_non_euclidean_codomain() {
        let mut rng = linalg::rng(11, 0);
        let m = linalg::gaussian_matrix(&mut rng, 4, 3);
        let t = Operator::with_norms(m, NormSpec::p2(), NormSpec::p1()).unwrap();
        let cfg = SearchConfig { restarts: 8, ..SearchConfig::default() };
        let e = width_upper(&t, 2, &cfg).unwrap();
        assert!(!e.certified);
        let (lo, hi) = width_bracket(&t, 2);
        assert!(e.lower >= lo - 1e-12 && e.upper <= hi + 1e-9 && e.lower <= e.upper);
    }

    #[test]
    fn width_sequence_enforces_monotone() {
        let seq = WidthSequence::new(alloc::vec![
            WidthEstimate { index: 1, lower: 1.0, upper: 2.0, witness: None, certified: true, method: Method::Search },
            WidthEstimate { index: 2, lower: 1.5, upper: 2.5, witness: None, certified: true, method: Method::Search },
        ]);
        assert_eq!(seq.get(2).unwrap().upper, 2.0);
        assert_eq!(seq.get(1).unwrap().lower, 1.5);
    }
}
