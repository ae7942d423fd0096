//! Domain truncations `T_m = T|_{span(φ_1..φ_m)}` and their width ladders.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::quadrature::{self, Rule};
use crate::spaces::{NormKind, NormSpec};
use crate::widths::{width_sequence, SearchConfig, WidthEstimate};

type Entry = Box<dyn Fn(usize, usize) -> f64 + Send + Sync>;
type Tail = Box<dyn Fn(usize) -> f64 + Send + Sync>;
type Kernel = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Operator on a space with a Schauder basis, given by the coordinates of
/// the images of the basis vectors in a fixed finite codomain.
///
/// `entry(i, j)` is coordinate `i` of `T φ_j` (both 0-based) and
/// `column_tail_bound(j)` bounds `‖T φ_j‖` in the codomain norm.
pub struct SequenceOperator {
    entry: Entry,
    column_tail_bound: Tail,
    codomain_dim: usize,
    domain: NormKind,
    codomain: NormSpec,
}

impl fmt::Debug for SequenceOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceOperator")
            .field("codomain_dim", &self.codomain_dim)
            .field("domain", &self.domain)
            .field("codomain", &self.codomain)
            .finish_non_exhaustive()
    }
}

impl SequenceOperator {
    pub fn new(
        codomain_dim: usize,
        domain: NormKind,
        codomain: NormSpec,
        entry: impl Fn(usize, usize) -> f64 + Send + Sync + 'static,
        column_tail_bound: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if codomain_dim == 0 {
            return Err(Error::InvalidParameter("codomain dimension must be positive".into()));
        }
        codomain.check_dim(codomain_dim)?;
        Ok(SequenceOperator { entry: Box::new(entry), column_tail_bound: Box::new(column_tail_bound), codomain_dim, domain, codomain })
    }

    /// Diagonal family `T φ_j = t_j e_j` embedded in `R^{codomain_dim}`;
    /// columns with `j ≥ codomain_dim` vanish.
    pub fn diagonal(codomain_dim: usize, t: impl Fn(usize) -> f64 + Send + Sync + Clone + 'static) -> Result<Self> {
        let bound = t.clone();
        SequenceOperator::new(
            codomain_dim,
            NormKind::P2,
            NormSpec::p2(),
            move |i, j| if i == j { t(j) } else { 0.0 },
            move |j| if j < codomain_dim { libm::fabs(bound(j)) } else { 0.0 },
        )
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        (self.entry)(i, j)
    }

    pub fn column_tail_bound(&self, j: usize) -> f64 {
        (self.column_tail_bound)(j)
    }

    /// Spot-checks the first `columns` columns against their declared bound.
    pub fn check_tail(&self, columns: usize) -> Result<()> {
        for j in 0..columns {
            let col: Vec<f64> = (0..self.codomain_dim).map(|i| self.entry(i, j)).collect();
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            let norm = self.codomain.norm(&col)?;
            let bound = self.column_tail_bound(j);
            if !(norm <= bound + 1e-12) {
                return Err(Error::InvalidParameter(format!("column {j} has norm {norm:e} above its declared bound {bound:e}")));
            }
        }
        Ok(())
    }
}

/// Operator formed by the first `m` columns of the family.
pub fn truncate(family: &SequenceOperator, m: usize) -> Result<Operator> {
    if m == 0 {
        return Err(Error::InvalidParameter("truncation size must be at least 1".into()));
    }
    let mat = DMatrix::from_fn(family.codomain_dim, m, |i, j| family.entry(i, j));
    Operator::with_norms(mat, NormSpec::new(family.domain), family.codomain.clone())
}

/// Integral operator `(Kf)(s) = ∫ k(s, t) f(t) dt` from `L2[c, d]` to `L2[a, b]`.
pub struct KernelOperator {
    kernel: Kernel,
    pub s_interval: (f64, f64),
    pub t_interval: (f64, f64),
    pub rule: Rule,
    pub domain: NormKind,
    pub codomain: NormKind,
}

impl fmt::Debug for KernelOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelOperator")
            .field("s_interval", &self.s_interval)
            .field("t_interval", &self.t_interval)
            .field("rule", &self.rule)
            .finish_non_exhaustive()
    }
}

impl KernelOperator {
    pub fn new(
        kernel: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        s_interval: (f64, f64),
        t_interval: (f64, f64),
        rule: Rule,
    ) -> Result<Self> {
        for (lo, hi) in [s_interval, t_interval] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter("kernel intervals must be finite and nonempty".into()));
            }
        }
        Ok(KernelOperator { kernel: Box::new(kernel), s_interval, t_interval, rule, domain: NormKind::P2, codomain: NormKind::P2 })
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        (self.kernel)(s, t)
    }
}

/// `A[i][j] = √(v_i w_j) k(s_i, t_j)` on `m` nodes per side.
pub fn discretize(k: &KernelOperator, m: usize) -> Result<Operator> {
    if m < 2 {
        return Err(Error::InvalidParameter("discretization needs at least 2 nodes".into()));
    }
    let (s, v) = quadrature::nodes(k.rule, m, k.s_interval.0, k.s_interval.1);
    let (t, w) = quadrature::nodes(k.rule, m, k.t_interval.0, k.t_interval.1);
    let mat = DMatrix::from_fn(m, m, |i, j| libm::sqrt(v[i] * w[j]) * k.eval(s[i], t[j]));
    if mat.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Operator::with_norms(mat, NormSpec::new(k.domain), NormSpec::new(k.codomain))
}

/// Sequence form of a kernel operator: the domain basis is the orthonormal
/// Legendre system on `[c, d]`, the codomain is sampled on `codomain_nodes`
/// quadrature nodes. Truncations are then nested restrictions.
///
/// Columns are computed for `modes` basis functions by a Gauss–Legendre rule
/// with `inner_nodes` points; higher modes are dropped, and the declared tail
/// bound is the running maximum of the computed column norms.
pub fn legendre_family(k: &KernelOperator, codomain_nodes: usize, modes: usize, inner_nodes: usize) -> Result<SequenceOperator> {
    if codomain_nodes < 2 || modes == 0 || inner_nodes < modes {
        return Err(Error::InvalidParameter("legendre family needs ≥ 2 nodes and inner_nodes ≥ modes".into()));
    }
    let (c, d) = k.t_interval;
    let (s, v) = quadrature::nodes(k.rule, codomain_nodes, k.s_interval.0, k.s_interval.1);
    let (t, w) = quadrature::nodes(Rule::GaussLegendre, inner_nodes, c, d);
    let phi: Vec<Vec<f64>> = t.iter().map(|tq| quadrature::orthonormal_legendre(modes, *tq, c, d)).collect();
    let mut cols = DMatrix::zeros(codomain_nodes, modes);
    for i in 0..codomain_nodes {
        let kv: Vec<f64> = t.iter().map(|tq| k.eval(s[i], *tq)).collect();
        for j in 0..modes {
            let integral: f64 = (0..inner_nodes).map(|q| w[q] * kv[q] * phi[q][j]).sum();
            cols[(i, j)] = libm::sqrt(v[i]) * integral;
        }
    }
    if cols.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let norms: Vec<f64> = (0..modes).map(|j| cols.column(j).norm()).collect();
    let mut tail = norms.clone();
    for j in (0..modes.saturating_sub(1)).rev() {
        tail[j] = tail[j].max(tail[j + 1]);
    }
    SequenceOperator::new(
        codomain_nodes,
        NormKind::P2,
        NormSpec::p2(),
        move |i, j| if j < modes { cols[(i, j)] } else { 0.0 },
        move |j| tail.get(j).copied().unwrap_or(0.0),
    )
}

/// One rung `σ_{n,m}` of a ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct Rung {
    pub m: usize,
    pub outcome: core::result::Result<WidthEstimate, Error>,
}

impl Rung {
    pub fn certified_value(&self) -> Option<f64> {
        match &self.outcome {
            Ok(e) if e.certified => Some(e.upper),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub n: usize,
    pub rungs: Vec<Rung>,
}

/// `σ_{n,m} = d_n(truncate(family, m))` for each `m` in `ms`.
pub fn ladder(family: &SequenceOperator, n: usize, ms: &[usize], cfg: &SearchConfig) -> Result<Ladder> {
    if n == 0 {
        return Err(Error::InvalidParameter("width index starts at 1".into()));
    }
    if ms.is_empty() || ms.windows(2).any(|w| w[0] >= w[1]) || ms[0] == 0 {
        return Err(Error::InvalidParameter("rung sizes must be positive and strictly increasing".into()));
    }
    let rungs = ms.iter().map(|&m| Rung { m, outcome: rung(family, n, m, cfg) }).collect();
    Ok(Ladder { n, rungs })
}

/// Width `d_n` of a single truncation.
pub fn rung(family: &SequenceOperator, n: usize, m: usize, cfg: &SearchConfig) -> core::result::Result<WidthEstimate, Error> {
    let t = truncate(family, m)?;
    let seq = width_sequence(&t, n, cfg)?;
    Ok(seq.get(n).cloned().expect("sequence has n entries"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub n: usize,
    pub ms: Vec<usize>,
    pub values: Vec<f64>,
    /// `values[i+1] − values[i]`.
    pub gaps: Vec<f64>,
    /// Every rung ≤ limit + 1e-9, when a limit was given.
    pub below_limit: Option<bool>,
    pub last_relative_gap: f64,
    pub converged: bool,
}

/// Checks monotone non-decrease of certified rungs, the lower-bound law
/// against `limit`, and a Cauchy-style convergence flag `last gap < rtol`.
pub fn convergence_report(l: &Ladder, limit: Option<f64>, rtol: f64) -> Result<ConvergenceReport> {
    let certified: Vec<(usize, f64)> = l.rungs.iter().filter_map(|r| r.certified_value().map(|v| (r.m, v))).collect();
    if certified.len() < 2 {
        return Err(Error::InsufficientRungs);
    }
    let scale = certified.iter().fold(1.0f64, |a, (_, v)| a.max(*v));
    for w in certified.windows(2) {
        if w[1].1 < w[0].1 - 1e-12 * scale {
            return Err(Error::MonotonicityViolation { first: w[0].0, second: w[1].0 });
        }
    }
    let ms: Vec<usize> = certified.iter().map(|r| r.0).collect();
    let values: Vec<f64> = certified.iter().map(|r| r.1).collect();
    let gaps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let last = values[values.len() - 1];
    let last_gap = gaps[gaps.len() - 1];
    let last_relative_gap = if last > 0.0 { libm::fabs(last_gap) / last } else { libm::fabs(last_gap) };
    let below_limit = limit.map(|lim| values.iter().all(|v| *v <= lim + 1e-9));
    Ok(ConvergenceReport { n: l.n, ms, values, gaps, below_limit, last_relative_gap, converged: last_relative_gap < rtol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::widths::widths_hilbert;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn halving() -> SequenceOperator {
        SequenceOperator::diagonal(8, |j| libm::pow(2.0, -(j as f64 + 1.0))).unwrap()
    }

    #[test]
    fn truncate_examples() {
        let f = halving();
        let t = truncate(&f, 3).unwrap();
        assert_eq!(t.rows(), 8);
        assert_eq!(t.cols(), 3);
        assert_eq!(t.matrix()[(0, 0)], 0.5);
        assert_eq!(t.matrix()[(2, 2)], 0.125);
        assert_eq!(t.matrix()[(3, 2)], 0.0);
        let t1 = truncate(&f, 1).unwrap();
        assert_eq!(widths_hilbert(&t1, 1).unwrap().uppers(), vec![0.5]);
        let t5 = truncate(&f, 5).unwrap();
        assert_eq!(t5.matrix().columns(0, 3), t.matrix().columns(0, 3));
        f.check_tail(12).unwrap();
    }

    #[test]
    fn tail_check_rejects_understated_bound() {
        let f = SequenceOperator::new(2, NormKind::P2, NormSpec::p2(), |i, j| (i + j) as f64, |_| 0.5).unwrap();
        assert!(f.check_tail(3).is_err());
    }

    #[test]
    fn diagonal_ladder() {
        let cfg = SearchConfig::default();
        let l = ladder(&halving(), 2, &[1, 2, 3, 4], &cfg).unwrap();
        let vals: Vec<f64> = l.rungs.iter().map(|r| r.certified_value().unwrap()).collect();
        assert_eq!(vals, vec![0.0, 0.25, 0.25, 0.25]);
        let rep = convergence_report(&l, Some(0.25), 1e-3).unwrap();
        assert_eq!(rep.below_limit, Some(true));
        assert!(rep.converged);
        let l1 = ladder(&halving(), 1, &[1, 3], &cfg).unwrap();
        assert_eq!(l1.rungs[0].certified_value(), Some(0.5));
        let single = ladder(&halving(), 2, &[3], &cfg).unwrap();
        assert_eq!(convergence_report(&single, None, 1e-3), Err(Error::InsufficientRungs));
        assert!(ladder(&halving(), 2, &[3, 3], &cfg).is_err());
    }

    #[test]
    fn monotonicity_violation_is_reported() {
        let mk = |m, v| Rung {
            m,
            outcome: Ok(WidthEstimate { index: 1, lower: v, upper: v, witness: None, certified: true, method: crate::widths::Method::Spectral }),
        };
        let l = Ladder { n: 1, rungs: vec![mk(2, 1.0), mk(4, 0.5)] };
        assert_eq!(convergence_report(&l, None, 1e-3), Err(Error::MonotonicityViolation { first: 2, second: 4 }));
    }

    #[test]
    fn discretize_examples() {
        let zero = KernelOperator::new(|_, _| 0.0, (0.0, 1.0), (0.0, 1.0), Rule::GaussLegendre).unwrap();
        assert!(discretize(&zero, 4).unwrap().matrix().iter().all(|v| *v == 0.0));
        let sep = KernelOperator::new(|s, t| libm::sin(3.0 * s) * (1.0 + t * t), (0.0, 1.0), (0.0, 1.0), Rule::GaussLegendre).unwrap();
        let d = widths_hilbert(&discretize(&sep, 16).unwrap(), 2).unwrap().uppers();
        assert!(d[1] <= 1e-10 * d[0].max(1.0));
        // midpoint rule: separable kernel norm is ‖f‖‖g‖ in the discrete ℓ2 sense
        let one = KernelOperator::new(|_, _| 1.0, (0.0, 2.0), (0.0, 1.0), Rule::Midpoint).unwrap();
        let d = widths_hilbert(&discretize(&one, 8).unwrap(), 1).unwrap().uppers();
        assert_abs_diff_eq!(d[0], libm::sqrt(2.0), epsilon = 1e-13);
    }

    #[test]
    fn legendre_family_matches_discretization() {
        let g = KernelOperator::new(|s, t| libm::exp(-(s - t) * (s - t) / 0.02), (0.0, 1.0), (0.0, 1.0), Rule::GaussLegendre).unwrap();
        let fam = legendre_family(&g, 96, 48, 160).unwrap();
        fam.check_tail(48).unwrap();
        let a = widths_hilbert(&truncate(&fam, 48).unwrap(), 5).unwrap().uppers();
        let b = widths_hilbert(&discretize(&g, 96).unwrap(), 5).unwrap().uppers();
        for (x, y) in a.iter().zip(&b) {
            assert!(libm::fabs(x - y) <= 1e-9 * y.max(1e-300), "{x} vs {y}");
        }
    }
}
