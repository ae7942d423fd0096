//! Degrees of freedom `N(ε) = #{n : d_n(T) > ε}` and its jump points.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::spaces::Subspace;
use crate::widths::{
    certified_bounds, operator_norm_bounds, quotient_norm_with, width_bracket, width_upper, widths_hilbert, SearchConfig,
    WidthSequence,
};

/// Result of counting widths above a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofCount {
    pub count: usize,
    /// Some width equals `ε` up to the tie tolerance; it was not counted.
    pub exact_tie: bool,
}

/// Lazily computed certified brackets `[lower(n), upper(n)]`, shared by
/// repeated level queries on one operator.
#[derive(Debug, Clone)]
pub struct DofLevels<'a> {
    op: &'a Operator,
    cfg: SearchConfig,
    brackets: Vec<(f64, f64)>,
    max_index: usize,
    norm: f64,
}

impl<'a> DofLevels<'a> {
    pub fn new(op: &'a Operator, cfg: &SearchConfig) -> Self {
        let norm = operator_norm_bounds(op, cfg).upper;
        let max_index = op.rows().min(op.cols());
        let mut brackets = Vec::new();
        if op.is_hilbert() {
            if let Ok(seq) = widths_hilbert(op, max_index) {
                brackets = seq.estimates().iter().map(|e| (e.lower, e.upper)).collect();
            }
        }
        DofLevels { op, cfg: *cfg, brackets, max_index, norm }
    }

    /// Levels over precomputed estimates of `d_1, d_2, …` (e.g. computed
    /// concurrently); further widths are computed on demand.
    pub fn with_sequence(op: &'a Operator, cfg: &SearchConfig, seq: &WidthSequence) -> Self {
        let mut levels = DofLevels::new(op, cfg);
        if !op.is_hilbert() {
            levels.brackets = seq.estimates().iter().map(|e| certified_bounds(op, e)).collect();
            for i in 1..levels.brackets.len() {
                let prev = levels.brackets[i - 1].1;
                let b = &mut levels.brackets[i];
                b.1 = b.1.min(prev);
                b.0 = b.0.min(b.1);
            }
        }
        levels
    }

    /// Upper bound on `‖T‖` used for scale-relative tolerances.
    pub fn scale(&self) -> f64 {
        self.norm
    }

    pub fn tie_tol(&self) -> f64 {
        1e-12 * self.norm.max(1.0)
    }

    /// Certified bracket for `d_n`; `(0, 0)` beyond the rank bound.
    pub fn bracket(&mut self, n: usize) -> Result<(f64, f64)> {
        if n > self.max_index {
            return Ok((0.0, 0.0));
        }
        while self.brackets.len() < n {
            let i = self.brackets.len() + 1;
            let (lower, mut upper) = certified_bounds(self.op, &width_upper(self.op, i, &self.cfg)?);
            if let Some(&(_, prev)) = self.brackets.last() {
                upper = upper.min(prev);
            }
            self.brackets.push((lower.min(upper), upper));
        }
        Ok(self.brackets[n - 1])
    }

    /// `N(ε)`, or `Indeterminate` when a bracket straddles `ε`.
    pub fn count(&mut self, eps: f64) -> Result<DofCount> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter("level must be positive and finite".into()));
        }
        let tol = self.tie_tol();
        let mut n = 1;
        loop {
            let (lower, upper) = self.bracket(n)?;
            if n > self.max_index || upper <= eps + tol {
                let exact_tie = n <= self.max_index && upper >= eps - tol;
                return Ok(DofCount { count: n - 1, exact_tie });
            }
            if lower <= eps + tol {
                return Err(Error::Indeterminate { index: n, low: n - 1, high: n });
            }
            n += 1;
        }
    }
}

/// `N(ε)` for a single level.
pub fn dof_at_level(t: &Operator, eps: f64, cfg: &SearchConfig) -> Result<DofCount> {
    DofLevels::new(t, cfg).count(eps)
}

/// Step function `N(ε) = #{n ≤ k : σ_n > ε}` given by its jump points.
#[derive(Debug, Clone, PartialEq)]
pub struct DofCurve {
    jumps: Vec<f64>,
    residual_bound: f64,
    certified: bool,
}

impl DofCurve {
    pub fn new(jumps: Vec<f64>, residual_bound: f64, certified: bool) -> Result<Self> {
        if jumps.iter().any(|v| !(*v >= 0.0)) || jumps.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("jumps must be non-negative and non-increasing".into()));
        }
        Ok(DofCurve { jumps, residual_bound, certified })
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn horizon(&self) -> usize {
        self.jumps.len()
    }

    /// Upper bound on `d_{k+1}`: the curve is exact for `ε ≥` this value.
    pub fn residual_bound(&self) -> f64 {
        self.residual_bound
    }

    /// All jump points come from certified widths.
    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn eval(&self, eps: f64) -> usize {
        self.jumps.iter().filter(|&&s| s > eps).count()
    }

    /// `(σ_n, n)` pairs: `N` drops below `n` at `ε = σ_n`.
    pub fn jump_pairs(&self) -> Vec<(f64, usize)> {
        self.jumps.iter().enumerate().map(|(i, &s)| (s, i + 1)).collect()
    }
}

/// Jump points `σ_n = d_n` for `n = 1..=k`.
pub fn dof_curve(t: &Operator, k: usize, cfg: &SearchConfig) -> Result<DofCurve> {
    if k == 0 {
        return Err(Error::InvalidParameter("curve horizon must be at least 1".into()));
    }
    let seq = crate::widths::width_sequence(t, k + 1, cfg)?;
    curve_from_sequence(t, &seq, k)
}

/// Curve over the first `k` entries of `seq`; entry `k + 1`, when present,
/// supplies the residual bound.
pub fn curve_from_sequence(t: &Operator, seq: &WidthSequence, k: usize) -> Result<DofCurve> {
    let est = &seq.estimates()[..k.min(seq.len())];
    let jumps = est.iter().map(|e| e.upper).collect();
    let certified = est.iter().all(|e| e.certified);
    let residual_bound = match seq.get(k + 1) {
        Some(e) if e.certified => e.upper,
        Some(e) => certified_bounds(t, e).1,
        None => width_bracket(t, k + 1).1,
    };
    DofCurve::new(jumps, residual_bound, certified)
}

/// Locates the `n`-th jump of `N` inside `bracket` by bisection on `ε`,
/// independently of the width value `d_n` itself.
pub fn jump_bisect(t: &Operator, n: usize, bracket: (f64, f64), cfg: &SearchConfig) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if n == 0 || !(lo > 0.0) || !(lo < hi) || !hi.is_finite() {
        return Err(Error::InvalidParameter("bisection needs n ≥ 1 and 0 < lo < hi".into()));
    }
    let mut levels = DofLevels::new(t, cfg);
    let tol = 1e-8 * levels.scale();
    let low_count = levels.count(lo)?.count;
    let high_count = levels.count(hi)?.count;
    if !(high_count < n && n <= low_count) {
        return Err(Error::InvalidBracket { low_count, high_count, target: n });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match levels.count(mid) {
            Ok(c) if c.count >= n => lo = mid,
            Ok(_) => hi = mid,
            Err(Error::Indeterminate { index, .. }) if index == n => {
                let (l, u) = levels.bracket(n)?;
                let (a, b) = (l.max(lo), u.min(hi));
                if b - a <= tol {
                    return Ok(0.5 * (a + b));
                }
                return Err(Error::Indeterminate { index, low: n - 1, high: n });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Builds a feasible set `{ψ_i}` by repeatedly adding the image of the
/// worst-approximated extreme point until `‖Q_S T‖ ≤ ε`.
pub fn greedy_dof_witness(t: &Operator, eps: f64, cfg: &SearchConfig) -> Result<(usize, Subspace)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("level must be positive".into()));
    }
    if !t.domain().norm.is_polyhedral() {
        return Err(Error::NotPolyhedral);
    }
    let rows = t.rows();
    let mut vectors = Vec::new();
    let mut s = Subspace::zero(rows);
    for _ in 0..=t.cols() {
        let q = quotient_norm_with(t, &s, cfg)?;
        if q.value <= eps {
            return Ok((vectors.len(), s));
        }
        let y = t.matrix() * &q.worst;
        vectors.push(y);
        s = Subspace::from_vectors(rows, &vectors)?;
    }
    Err(Error::NonTermination(t.cols()))
}
