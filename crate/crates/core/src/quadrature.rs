//! Quadrature rules on an interval and orthonormal Legendre polynomials.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Midpoint,
    GaussLegendre,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Midpoint => "midpoint",
            Rule::GaussLegendre => "gauss_legendre",
        }
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "midpoint" => Ok(Rule::Midpoint),
            "gauss_legendre" | "gauss-legendre" | "gl" => Ok(Rule::GaussLegendre),
            _ => Err(Error::InvalidParameter(alloc::format!("unknown quadrature rule `{s}`"))),
        }
    }
}

/// Nodes and weights of `rule` with `n` points on `[a, b]`.
pub fn nodes(rule: Rule, n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    match rule {
        Rule::Midpoint => {
            let h = (b - a) / n as f64;
            ((0..n).map(|i| a + (i as f64 + 0.5) * h).collect(), vec![h; n])
        }
        Rule::GaussLegendre => {
            let (x, w) = gauss_legendre(n);
            (x.iter().map(|t| mid + half * t).collect(), w.iter().map(|v| half * v).collect())
        }
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if libm::fabs(x) < 1.0 { nf * (x * p1 - p0) / (x * x - 1.0) } else { 0.5 * nf * (nf + 1.0) * libm::pow(x, nf + 1.0) };
    (p1, dp)
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if libm::fabs(dz) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `φ_0(t), …, φ_{count-1}(t)`: Legendre polynomials orthonormal in `L2[a, b]`.
pub fn orthonormal_legendre(count: usize, t: f64, a: f64, b: f64) -> Vec<f64> {
    let x = (2.0 * t - a - b) / (b - a);
    let mut out = Vec::with_capacity(count);
    let (mut p0, mut p1) = (1.0, x);
    for j in 0..count {
        let p = match j {
            0 => 1.0,
            1 => x,
            _ => {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
                p2
            }
        };
        out.push(p * libm::sqrt((2.0 * j as f64 + 1.0) / (b - a)));
    }
    out
}
