//! Command implementations. Each returns a [`Report`]; the caller writes it.

use anyhow::{bail, Result};
use kwidth_core::axioms::{selftest_case, Axiom, SelftestCase, Verdict};
use kwidth_core::channels::{dof_vs_2wt, timefreq_matrix};
use kwidth_core::dof::{curve_from_sequence, DofLevels};
use kwidth_core::truncation::{convergence_report, rung, Ladder, Rung};
use kwidth_core::widths::{
    widths_exact_small, widths_hilbert, width_upper, ExactSmallConfig, SearchConfig, WidthEstimate, WidthSequence,
};
use kwidth_core::{Error, Operator};
use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::report::{num, Report, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum WidthMethod {
    /// Singular values for ℓ2 → ℓ2, subspace search otherwise.
    Auto,
    Search,
    ExactSmall,
}

impl WidthMethod {
    pub fn name(self) -> &'static str {
        match self {
            WidthMethod::Auto => "auto",
            WidthMethod::Search => "search",
            WidthMethod::ExactSmall => "exact-small",
        }
    }
}

/// `lo:hi:steps`, evenly spaced and inclusive.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        bail!("grid `{s}` is not of the form lo:hi:steps");
    };
    let lo: f64 = lo.trim().parse()?;
    let hi: f64 = hi.trim().parse()?;
    let steps: usize = steps.trim().parse()?;
    if !(lo.is_finite() && hi.is_finite()) || steps == 0 || hi < lo {
        bail!("grid `{s}` needs finite lo ≤ hi and at least one step");
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..steps).map(|i| if i + 1 == steps { hi } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 }).collect())
}

/// Widths `d_1..d_k`, one parallel task per index.
pub fn compute_widths(op: &Operator, k: usize, method: WidthMethod, cfg: &SearchConfig) -> Result<WidthSequence> {
    if k == 0 {
        bail!("--k must be at least 1");
    }
    let est: Vec<WidthEstimate> = match method {
        WidthMethod::Auto if op.is_hilbert() => return Ok(widths_hilbert(op, k)?),
        WidthMethod::Auto | WidthMethod::Search => (1..=k).into_par_iter().map(|n| width_upper(op, n, cfg)).collect::<Result<_, Error>>()?,
        WidthMethod::ExactSmall => {
            let ecfg = ExactSmallConfig::default();
            (1..=k).into_par_iter().map(|n| widths_exact_small(op, n, &ecfg)).collect::<Result<_, Error>>()?
        }
    };
    Ok(WidthSequence::new(est))
}

pub fn widths(op: &Operator, k: usize, method: WidthMethod, cfg: &SearchConfig, config: Value) -> Result<Report> {
    let seq = compute_widths(op, k, method, cfg)?;
    let rows = seq
        .estimates()
        .iter()
        .map(|e| vec![e.index.to_string(), num(e.lower), num(e.upper), e.certified.to_string(), e.method.name().to_string()])
        .collect();
    let records: Vec<Value> = seq
        .estimates()
        .iter()
        .map(|e| json!({ "n": e.index, "lower": e.lower, "upper": e.upper, "certified": e.certified, "method": e.method.name() }))
        .collect();
    let status = if seq.all_certified() { Status::Clean } else { Status::Indeterminate };
    Ok(Report {
        config,
        header: vec!["n", "lower", "upper", "certified", "method"],
        rows,
        notes: vec![],
        results: json!({ "widths": records }),
        status,
        twin: true,
    })
}

pub fn dof(op: &Operator, k: usize, levels: &[f64], cfg: &SearchConfig, config: Value) -> Result<Report> {
    let seq = compute_widths(op, k, WidthMethod::Auto, cfg)?;
    let curve = curve_from_sequence(op, &seq, k)?;
    let mut counter = DofLevels::with_sequence(op, cfg, &seq);
    let mut status = if curve.certified() { Status::Clean } else { Status::Indeterminate };
    let mut rows = Vec::new();
    let mut jumps = Vec::new();
    for (sigma, n) in curve.jump_pairs() {
        let e = seq.get(n).expect("curve is a prefix of the sequence");
        let tag = if e.certified { "certified" } else { "uncertified" };
        rows.push(vec!["jump".into(), num(sigma), n.to_string(), num(e.lower), num(e.upper), tag.into()]);
        jumps.push(json!({ "sigma": sigma, "n": n, "lower": e.lower, "upper": e.upper, "certified": e.certified }));
    }
    let mut samples = Vec::new();
    for &eps in levels {
        if !(eps >= 0.0) || !eps.is_finite() {
            bail!("levels must be finite and non-negative, got {eps}");
        }
        match counter.count(eps) {
            Ok(c) => {
                let tag = if c.exact_tie { "tie" } else { "exact" };
                let n = c.count.to_string();
                rows.push(vec!["level".into(), num(eps), n.clone(), n.clone(), n, tag.into()]);
                samples.push(json!({ "eps": eps, "count": c.count, "status": tag }));
            }
            Err(Error::Indeterminate { low, high, .. }) => {
                status = status.worst(Status::Indeterminate);
                rows.push(vec!["level".into(), num(eps), String::new(), low.to_string(), high.to_string(), "indeterminate".into()]);
                samples.push(json!({ "eps": eps, "count": Value::Null, "low": low, "high": high, "status": "indeterminate" }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Report {
        config,
        header: vec!["record", "eps", "n", "lower", "upper", "status"],
        rows,
        notes: vec![("residual_bound".into(), num(curve.residual_bound()))],
        results: json!({ "jumps": jumps, "levels": samples, "residual_bound": curve.residual_bound(), "certified": curve.certified() }),
        status,
        twin: false,
    })
}

pub fn ladder(res: &crate::source::Resolved, n: usize, ms: &[usize], rtol: f64, limit: Option<f64>, cfg: &SearchConfig, config: Value) -> Result<Report> {
    if n == 0 {
        bail!("--n must be at least 1");
    }
    if ms.is_empty() || ms.windows(2).any(|w| w[0] >= w[1]) || ms[0] == 0 {
        bail!("--ms must be positive and strictly increasing");
    }
    let modes = *ms.last().expect("non-empty");
    let family = res.family(modes)?;
    family.check_tail(modes)?;
    let rungs: Vec<Rung> = ms.par_iter().map(|&m| Rung { m, outcome: rung(&family, n, m, cfg) }).collect();
    let l = Ladder { n, rungs };
    let mut status = Status::Clean;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for r in &l.rungs {
        match &r.outcome {
            Ok(e) => {
                if !e.certified {
                    status = status.worst(Status::Indeterminate);
                }
                rows.push(vec![r.m.to_string(), num(e.lower), num(e.upper), e.certified.to_string(), String::new()]);
                records.push(json!({ "m": r.m, "lower": e.lower, "upper": e.upper, "certified": e.certified }));
            }
            Err(err) => {
                status = status.worst(Status::Indeterminate);
                rows.push(vec![r.m.to_string(), String::new(), String::new(), "false".into(), err.to_string()]);
                records.push(json!({ "m": r.m, "error": err.to_string() }));
            }
        }
    }
    let finest = l.rungs.last().and_then(Rung::certified_value);
    let limit = limit.or(finest);
    let (verdict, summary) = match convergence_report(&l, limit, rtol) {
        Ok(rep) => {
            if rep.below_limit == Some(false) {
                status = Status::Failed;
            }
            let v = if rep.below_limit == Some(false) {
                "above-limit"
            } else if rep.converged {
                "converged"
            } else {
                "not-converged"
            };
            let s = json!({
                "verdict": v, "ms": rep.ms, "values": rep.values, "gaps": rep.gaps,
                "below_limit": rep.below_limit, "limit": limit, "last_relative_gap": rep.last_relative_gap, "converged": rep.converged,
            });
            (v.to_string(), s)
        }
        Err(Error::MonotonicityViolation { first, second }) => {
            status = Status::Failed;
            let v = format!("monotonicity-violation m={first} -> m={second}");
            (v.clone(), json!({ "verdict": v, "first": first, "second": second }))
        }
        Err(Error::InsufficientRungs) => {
            status = status.worst(Status::Indeterminate);
            ("insufficient-rungs".to_string(), json!({ "verdict": "insufficient-rungs" }))
        }
        Err(e) => return Err(e.into()),
    };
    let mut notes = vec![("verdict".into(), verdict)];
    if let Some(g) = summary.get("last_relative_gap").and_then(Value::as_f64) {
        notes.push(("last_relative_gap".into(), num(g)));
    }
    Ok(Report {
        config,
        header: vec!["m", "lower", "upper", "certified", "error"],
        rows,
        notes,
        results: json!({ "n": n, "rungs": records, "convergence": summary }),
        status,
        twin: false,
    })
}

pub fn axioms(euclidean: usize, mixed: usize, seed: u64, cfg: &SearchConfig, config: Value) -> Result<Report> {
    let jobs: Vec<(Axiom, usize, bool)> = Axiom::ALL
        .iter()
        .flat_map(|&a| (0..euclidean).map(move |i| (a, i, false)).chain((0..mixed).map(move |i| (a, i, true))))
        .collect();
    let cases: Vec<SelftestCase> = jobs.par_iter().map(|&(a, i, m)| selftest_case(a, i, m, seed, cfg)).collect::<Result<_, Error>>()?;
    let mut status = Status::Clean;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut tally: std::collections::BTreeMap<String, usize> = Default::default();
    for c in &cases {
        let r = &c.report;
        match r.verdict {
            Verdict::Fail => status = Status::Failed,
            Verdict::Inconclusive => status = status.worst(Status::Indeterminate),
            Verdict::Pass | Verdict::OutOfScope => {}
        }
        *tally.entry(format!("{}/{}", r.axiom.name(), r.verdict.name())).or_default() += 1;
        let digest = format!("{:016x}", r.digest);
        rows.push(vec![
            r.axiom.name().into(),
            c.index.to_string(),
            c.mixed.to_string(),
            c.label.clone(),
            r.verdict.name().into(),
            num(r.slack),
            num(r.optimistic_slack),
            num(r.tol),
            digest.clone(),
        ]);
        records.push(json!({
            "axiom": r.axiom.name(), "index": c.index, "mixed": c.mixed, "label": c.label, "verdict": r.verdict.name(),
            "passed": r.passed, "slack": r.slack, "optimistic_slack": r.optimistic_slack, "tol": r.tol, "digest": digest,
        }));
    }
    let notes = tally.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
    Ok(Report {
        config,
        header: vec!["axiom", "index", "mixed", "label", "verdict", "slack", "optimistic_slack", "tol", "digest"],
        rows,
        notes,
        results: json!({ "cases": records, "tally": tally }),
        status,
        twin: false,
    })
}

/// Eigenvalues of the symmetric limiter above `eps` in absolute value.
pub fn eigen_count(size: usize, w: f64, eps: f64) -> Result<usize> {
    let eig = SymmetricEigen::new(timefreq_matrix(size, w)?);
    Ok(eig.eigenvalues.iter().filter(|v| v.abs() > eps).count())
}

pub fn demo_2wt(size: usize, bandwidth: f64, levels: &[f64], config: Value) -> Result<Report> {
    let reports = levels.par_iter().map(|&eps| dof_vs_2wt(size, bandwidth, eps)).collect::<Result<Vec<_>, Error>>()?;
    let eig = SymmetricEigen::new(timefreq_matrix(size, bandwidth)?);
    let mut status = Status::Clean;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for r in &reports {
        let oracle = eig.eigenvalues.iter().filter(|v| v.abs() > r.eps).count();
        if oracle != r.dof {
            status = status.worst(Status::Indeterminate);
        }
        rows.push(vec![num(r.eps), r.dof.to_string(), oracle.to_string(), num(r.twowt), num(r.deviation)]);
        records.push(json!({ "eps": r.eps, "dof": r.dof, "eigen_count": oracle, "twowt": r.twowt, "deviation": r.deviation }));
    }
    let first = reports.first().ok_or_else(|| anyhow::anyhow!("no levels given"))?;
    let p = &first.plunge;
    let admissible: Vec<f64> = reports.iter().filter(|r| r.deviation.abs() <= 3.0).map(|r| r.eps).collect();
    let plunge = json!({
        "above_high": p.above_high, "above_low": p.above_low, "plunge_width": p.plunge_width, "log_constant": p.log_constant,
    });
    let notes = vec![
        ("twowt".into(), num(first.twowt)),
        ("plunge".into(), format!("above_0.9={} above_0.1={} width={} log_constant={}", p.above_high, p.above_low, p.plunge_width, num(p.log_constant))),
        ("levels_within_3".into(), admissible.len().to_string()),
    ];
    Ok(Report {
        config,
        header: vec!["eps", "dof", "eigen_count", "twowt", "deviation"],
        rows,
        notes,
        results: json!({
            "size": size, "bandwidth": bandwidth, "twowt": first.twowt, "levels": records, "plunge": plunge,
            "levels_within_3": admissible,
        }),
        status,
        twin: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.5:3.5:4").unwrap(), vec![0.5, 1.5, 2.5, 3.5]);
        assert_eq!(parse_grid("1:1:1").unwrap(), vec![1.0]);
        assert!(parse_grid("1:0:3").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn dof_levels_for_diagonal() {
        let op = Operator::euclidean(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]))).unwrap();
        let r = dof(&op, 3, &[0.5, 1.5, 2.5, 3.5], &SearchConfig::default(), json!({})).unwrap();
        let counts: Vec<&str> = r.rows.iter().filter(|row| row[0] == "level").map(|row| row[2].as_str()).collect();
        assert_eq!(counts, ["3", "2", "1", "0"]);
        assert_eq!(r.status, Status::Clean);
    }

    #[test]
    fn limiter_eigen_oracle() {
        assert_eq!(eigen_count(256, 0.1, 0.5).unwrap(), 51);
    }
}
