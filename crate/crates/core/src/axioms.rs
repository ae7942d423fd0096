//! One-sided checkers for the s-number axioms applied to Kolmogorov numbers.
//!
//! Every check compares upper bounds of the left side with lower bounds of
//! the right side, so loose brackets yield `Inconclusive` and never a pass.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::hash::Hasher;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::Operator;
use crate::spaces::{NormKind, NormSpec};
use crate::widths::{certified_bounds, operator_norm_bounds, width_upper, widths_hilbert, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    Sn1,
    Sn2,
    Sn3,
    Sn4,
    Sn5,
}

impl Axiom {
    pub const ALL: [Axiom; 5] = [Axiom::Sn1, Axiom::Sn2, Axiom::Sn3, Axiom::Sn4, Axiom::Sn5];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Sn1 => "SN1",
            Axiom::Sn2 => "SN2",
            Axiom::Sn3 => "SN3",
            Axiom::Sn4 => "SN4",
            Axiom::Sn5 => "SN5",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Certified violation: the bounds exclude the inequality.
    Fail,
    Inconclusive,
    /// The instance lies outside the axiom's hypothesis.
    OutOfScope,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::OutOfScope => "out-of-scope",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub verdict: Verdict,
    /// `slack ≥ −tol`.
    pub passed: bool,
    /// Sound margin: right-side lower bound minus left-side upper bound.
    pub slack: f64,
    /// Optimistic margin; a value below `−tol` certifies a violation.
    pub optimistic_slack: f64,
    pub tol: f64,
    /// FNV-1a hash of the matrices, norms and index under test.
    pub digest: u64,
}

impl AxiomReport {
    fn new(axiom: Axiom, slack: f64, optimistic_slack: f64, tol: f64, digest: u64) -> Self {
        let passed = slack >= -tol;
        let verdict = if passed {
            Verdict::Pass
        } else if optimistic_slack < -tol {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        AxiomReport { axiom, verdict, passed, slack, optimistic_slack, tol, digest }
    }

    fn out_of_scope(axiom: Axiom, digest: u64) -> Self {
        AxiomReport { axiom, verdict: Verdict::OutOfScope, passed: true, slack: 0.0, optimistic_slack: 0.0, tol: 0.0, digest }
    }
}

fn digest(ops: &[&Operator], n: usize) -> u64 {
    let mut h = fnv::FnvHasher::default();
    for op in ops {
        h.write_usize(op.rows());
        h.write_usize(op.cols());
        for v in op.matrix().iter() {
            h.write_u64(v.to_bits());
        }
        for norm in [&op.domain().norm, &op.codomain().norm] {
            h.write(norm.kind().name().as_bytes());
            for w in norm.weights().unwrap_or(&[]) {
                h.write_u64(w.to_bits());
            }
        }
    }
    h.write_usize(n);
    h.finish()
}

/// Certified `(lower, upper)` for `d_n`.
fn width_bounds(t: &Operator, n: usize, cfg: &SearchConfig) -> Result<(f64, f64)> {
    if t.is_hilbert() {
        let v = widths_hilbert(t, n)?.get(n).map_or(0.0, |e| e.upper);
        return Ok((v, v));
    }
    Ok(certified_bounds(t, &width_upper(t, n, cfg)?))
}

fn norm_bounds(t: &Operator, cfg: &SearchConfig) -> (f64, f64) {
    let b = operator_norm_bounds(t, cfg);
    (b.lower, b.upper)
}

fn tol_for(norms: &[f64]) -> f64 {
    1e-8 * norms.iter().fold(1.0f64, |a, b| a.max(*b))
}

/// `d_1 = ‖T‖` and `d_1 ≥ d_2 ≥ … ≥ d_k ≥ 0`.
pub fn check_sn1(t: &Operator, k: usize, cfg: &SearchConfig) -> Result<AxiomReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let (nl, nu) = norm_bounds(t, cfg);
    let bounds: Vec<(f64, f64)> = (1..=k).map(|n| width_bounds(t, n, cfg)).collect::<Result<_>>()?;
    let (l1, u1) = bounds[0];
    let mut slack = -(u1 - nl).max(nu - l1).max(0.0);
    let mut optimistic = -(l1 - nu).max(nl - u1).max(0.0);
    for w in bounds.windows(2) {
        slack = slack.min(w[0].0 - w[1].1);
        optimistic = optimistic.min(w[0].1 - w[1].0);
    }
    slack = slack.min(bounds[k - 1].0);
    Ok(AxiomReport::new(Axiom::Sn1, slack, optimistic, tol_for(&[nu]), digest(&[t], k)))
}

/// `d_n(S + T) ≤ d_n(S) + ‖T‖`.
pub fn check_sn2(s: &Operator, t: &Operator, n: usize, cfg: &SearchConfig) -> Result<AxiomReport> {
    let sum = s.add(t)?;
    let (sl, su) = width_bounds(s, n, cfg)?;
    let (ml, mu) = width_bounds(&sum, n, cfg)?;
    let (tl, tu) = norm_bounds(t, cfg);
    let (_, snu) = norm_bounds(s, cfg);
    let slack = sl + tl - mu;
    let optimistic = su + tu - ml;
    Ok(AxiomReport::new(Axiom::Sn2, slack, optimistic, tol_for(&[snu, tu]), digest(&[s, t], n)))
}

/// `d_n(B T A) ≤ ‖B‖ d_n(T) ‖A‖` for `A: X0 → X`, `T: X → Y`, `B: Y → Y0`.
pub fn check_sn3(a: &Operator, t: &Operator, b: &Operator, n: usize, cfg: &SearchConfig) -> Result<AxiomReport> {
    let bta = a.then(t)?.then(b)?;
    let (ml, mu) = width_bounds(&bta, n, cfg)?;
    let (tl, tu) = width_bounds(t, n, cfg)?;
    let (al, au) = norm_bounds(a, cfg);
    let (bl, bu) = norm_bounds(b, cfg);
    let (_, tnu) = norm_bounds(t, cfg);
    let slack = bl * tl * al - mu;
    let optimistic = bu * tu * au - ml;
    Ok(AxiomReport::new(Axiom::Sn3, slack, optimistic, tol_for(&[au * tnu * bu, tnu]), digest(&[a, t, b], n)))
}

/// Finite surrogate `d_n(I_k) = 1` on `ℓ2^k`; `n > k` is out of scope.
pub fn check_sn4_finite(k: usize, n: usize) -> Result<AxiomReport> {
    check_sn4_with(k, n, NormSpec::p2(), &SearchConfig::default())
}

/// `d_n(I_k) = 1` for the identity of `(R^k, norm)`.
pub fn check_sn4_with(k: usize, n: usize, norm: NormSpec, cfg: &SearchConfig) -> Result<AxiomReport> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter("k and n must be at least 1".into()));
    }
    let id = Operator::with_norms(DMatrix::identity(k, k), norm.clone(), norm)?;
    let dig = digest(&[&id], n);
    if n > k {
        return Ok(AxiomReport::out_of_scope(Axiom::Sn4, dig));
    }
    let (l, u) = width_bounds(&id, n, cfg)?;
    let slack = -(u - 1.0).max(1.0 - l).max(0.0);
    let optimistic = -(l - 1.0).max(1.0 - u).max(0.0);
    Ok(AxiomReport::new(Axiom::Sn4, slack, optimistic, tol_for(&[1.0]), dig))
}

/// `d_n(T) = 0` when the numerical rank of `T` is below `n`.
pub fn check_sn5(t: &Operator, n: usize, cfg: &SearchConfig) -> Result<AxiomReport> {
    let dig = digest(&[t], n);
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if linalg::numerical_rank(t.matrix()) >= n {
        return Ok(AxiomReport::out_of_scope(Axiom::Sn5, dig));
    }
    let (l, u) = width_bounds(t, n, cfg)?;
    let (_, nu) = norm_bounds(t, cfg);
    Ok(AxiomReport::new(Axiom::Sn5, -u, -l, tol_for(&[nu]), dig))
}

/// One seeded self-test case.
#[derive(Debug, Clone, PartialEq)]
pub struct SelftestCase {
    pub axiom: Axiom,
    pub index: usize,
    pub mixed: bool,
    pub label: String,
    pub report: AxiomReport,
}

fn random_op(seed: u64, stream: u64, rows: usize, cols: usize, domain: NormSpec, codomain: NormSpec) -> Result<Operator> {
    Operator::with_norms(linalg::gaussian_matrix(&mut linalg::rng(seed, stream), rows, cols), domain, codomain)
}

fn mixed_kind(i: u64) -> NormKind {
    [NormKind::P1, NormKind::PInf, NormKind::P2][(i % 3) as usize]
}

/// Runs case `index` of `axiom`: Euclidean instances of size 2–5, or mixed
/// instances (ℓ1/ℓ∞ domains, all three codomains) of size 3.
pub fn selftest_case(axiom: Axiom, index: usize, mixed: bool, seed: u64, cfg: &SearchConfig) -> Result<SelftestCase> {
    let i = index as u64;
    let base = (axiom as u64) << 32 | (mixed as u64) << 31 | i << 4;
    let (dom, cod, dim) = if mixed {
        let d = if i % 2 == 0 { NormKind::P1 } else { NormKind::PInf };
        (NormSpec::new(d), NormSpec::new(mixed_kind(i / 2)), 3)
    } else {
        (NormSpec::p2(), NormSpec::p2(), 2 + index % 4)
    };
    let rows = dim;
    let cols = if mixed { 3 } else { 2 + (index / 4) % 4 };
    let n = 1 + index % 3;
    let (label, report) = match axiom {
        Axiom::Sn1 => {
            let t = random_op(seed, base, rows, cols, dom.clone(), cod.clone())?;
            (format!("T {rows}x{cols} {}->{} k=3", dom.kind().name(), cod.kind().name()), check_sn1(&t, 3, cfg)?)
        }
        Axiom::Sn2 => {
            let s = random_op(seed, base, rows, cols, dom.clone(), cod.clone())?;
            let t = random_op(seed, base + 1, rows, cols, dom.clone(), cod.clone())?.scaled(0.5)?;
            (format!("S,T {rows}x{cols} {}->{} n={n}", dom.kind().name(), cod.kind().name()), check_sn2(&s, &t, n, cfg)?)
        }
        Axiom::Sn3 => {
            let mid = if mixed { NormSpec::new(mixed_kind(i + 1)) } else { NormSpec::p2() };
            let a = random_op(seed, base, cols, cols, dom.clone(), mid.clone())?;
            let t = random_op(seed, base + 1, rows, cols, mid.clone(), cod.clone())?;
            let b = random_op(seed, base + 2, rows, rows, cod.clone(), cod.clone())?;
            let label = format!("A,T,B {}->{}->{} n={n}", dom.kind().name(), mid.kind().name(), cod.kind().name());
            (label, check_sn3(&a, &t, &b, n, cfg)?)
        }
        Axiom::Sn4 => {
            let k = 1 + index % if mixed { 3 } else { 6 };
            let n4 = 1 + (index / 6) % k;
            let norm = if mixed { dom.clone() } else { NormSpec::p2() };
            (format!("I_{k} {} n={n4}", norm.kind().name()), check_sn4_with(k, n4, norm, cfg)?)
        }
        Axiom::Sn5 => {
            // planted rank r ≤ min(rows, cols) − 1, tested at n = r + 1
            let r = index % rows.min(cols);
            let u = linalg::gaussian_matrix(&mut linalg::rng(seed, base), rows, r);
            let v = linalg::gaussian_matrix(&mut linalg::rng(seed, base + 1), r, cols);
            let t = Operator::with_norms(u * v, dom.clone(), cod.clone())?;
            (format!("rank {r} {rows}x{cols} {}->{} n={}", dom.kind().name(), cod.kind().name(), r + 1), check_sn5(&t, r + 1, cfg)?)
        }
    };
    Ok(SelftestCase { axiom, index, mixed, label, report })
}

/// All self-test cases in a fixed order: for each axiom, `euclidean`
/// Euclidean cases then `mixed` mixed-norm cases.
pub fn selftest(euclidean: usize, mixed: usize, seed: u64, cfg: &SearchConfig) -> Result<Vec<SelftestCase>> {
    let mut out = Vec::new();
    for axiom in Axiom::ALL {
        for (count, flag) in [(euclidean, false), (mixed, true)] {
            for index in 0..count {
                out.push(selftest_case(axiom, index, flag, seed, cfg)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    fn diag(v: &[f64]) -> Operator {
        Operator::euclidean(DMatrix::from_diagonal(&DVector::from_column_slice(v))).unwrap()
    }

    #[test]
    fn sn1_examples() {
        assert_eq!(check_sn1(&diag(&[3.0, 2.0, 1.0]), 3, &cfg()).unwrap().verdict, Verdict::Pass);
        let z = check_sn1(&Operator::euclidean(DMatrix::zeros(3, 3)).unwrap(), 3, &cfg()).unwrap();
        assert_eq!(z.verdict, Verdict::Pass);
        assert_eq!(z.slack, 0.0);
        let mut rng = linalg::rng(4, 4);
        let t = Operator::with_norms(linalg::gaussian_matrix(&mut rng, 4, 4), NormSpec::p1(), NormSpec::p2()).unwrap();
        assert_eq!(check_sn1(&t, 4, &cfg()).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn sn2_examples() {
        let s = diag(&[3.0, 2.0, 1.0]);
        let zero = Operator::euclidean(DMatrix::zeros(3, 3)).unwrap();
        let r = check_sn2(&s, &zero, 2, &cfg()).unwrap();
        assert!(r.passed && libm::fabs(r.slack) <= 1e-15);
        let r = check_sn2(&zero, &s, 2, &cfg()).unwrap();
        assert!(r.passed);
        assert_eq!(r.slack, 3.0 - 2.0);
        let mut rng = linalg::rng(6, 0);
        let a = Operator::euclidean(linalg::gaussian_matrix(&mut rng, 4, 4)).unwrap();
        let b = Operator::euclidean(linalg::gaussian_matrix(&mut rng, 4, 4)).unwrap();
        assert_eq!(check_sn2(&a, &b, 2, &cfg()).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn sn3_examples() {
        let t = diag(&[3.0, 2.0, 1.0]);
        let id = diag(&[1.0, 1.0, 1.0]);
        let r = check_sn3(&id, &t, &id, 2, &cfg()).unwrap();
        assert!(r.passed && libm::fabs(r.slack) <= 1e-14);
        let two = diag(&[2.0, 2.0, 2.0]);
        let r = check_sn3(&id, &t, &two, 2, &cfg()).unwrap();
        assert!(r.passed && libm::fabs(r.slack) <= 1e-14);
        let mut rng = linalg::rng(7, 0);
        let ops: Vec<Operator> = (0..3).map(|_| Operator::euclidean(linalg::gaussian_matrix(&mut rng, 3, 3)).unwrap()).collect();
        assert_eq!(check_sn3(&ops[0], &ops[1], &ops[2], 2, &cfg()).unwrap().verdict, Verdict::Pass);
        let p1 = Operator::with_norms(DMatrix::identity(3, 3), NormSpec::p1(), NormSpec::p2()).unwrap();
        assert!(check_sn3(&p1, &p1, &p1, 1, &cfg()).is_err());
    }

    #[test]
    fn sn4_examples() {
        assert_eq!(check_sn4_finite(3, 2).unwrap().verdict, Verdict::Pass);
        assert_eq!(check_sn4_finite(3, 4).unwrap().verdict, Verdict::OutOfScope);
        assert_eq!(check_sn4_finite(1, 1).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn sn5_examples() {
        let u = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let rank1 = Operator::euclidean(&u * u.transpose()).unwrap();
        let r = check_sn5(&rank1, 2, &cfg()).unwrap();
        assert!(r.passed);
        assert_eq!(check_sn5(&Operator::euclidean(DMatrix::zeros(2, 2)).unwrap(), 1, &cfg()).unwrap().verdict, Verdict::Pass);
        // 1e-14 lies below the rank tolerance 1e-10 · max column norm
        let near = diag(&[1.0, 1e-14, 0.0]);
        let r = check_sn5(&near, 2, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.slack <= -1e-15 && r.slack >= -1e-13);
        // 1e-9 is above it: rank 2, so n = 2 is out of scope
        assert_eq!(check_sn5(&diag(&[1.0, 1e-9, 0.0]), 2, &cfg()).unwrap().verdict, Verdict::OutOfScope);
    }

    #[test]
    fn certified_failure_is_reported() {
        let r = AxiomReport::new(Axiom::Sn2, -1.0, -0.5, 1e-8, 0);
        assert_eq!(r.verdict, Verdict::Fail);
        let r = AxiomReport::new(Axiom::Sn2, -1.0, 0.5, 1e-8, 0);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(!r.passed);
    }

    #[test]
    fn digest_depends_on_inputs() {
        let a = check_sn4_finite(3, 2).unwrap().digest;
        assert_eq!(a, check_sn4_finite(3, 2).unwrap().digest);
        assert_ne!(a, check_sn4_finite(3, 1).unwrap().digest);
        let s = diag(&[1.0, 2.0]);
        let w = Operator::with_norms(s.matrix().clone(), NormSpec::p1(), NormSpec::p2()).unwrap();
        assert_ne!(digest(&[&s], 1), digest(&[&w], 1));
    }

    #[test]
    fn small_selftest_has_no_failures() {
        let cases = selftest(4, 2, 3, &cfg()).unwrap();
        assert_eq!(cases.len(), 5 * 6);
        assert!(cases.iter().all(|c| c.report.verdict != Verdict::Fail), "{:?}", cases.iter().find(|c| c.report.verdict == Verdict::Fail));
        assert!(cases.iter().filter(|c| !c.mixed).all(|c| c.report.passed));
    }
}
