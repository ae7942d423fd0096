//! Gallery of channel operators, including the discrete time–frequency
//! limiting matrix.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;

use crate::dof::dof_at_level;
use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::Operator;
use crate::quadrature::Rule;
use crate::spaces::NormSpec;
use crate::truncation::{discretize, KernelOperator};
use crate::widths::{widths_hilbert, SearchConfig};

/// Decay rule of a diagonal channel, indexed from `j = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `t_j = 1 / j`.
    Harmonic,
    /// `t_j = r^j`.
    Geometric(f64),
    /// `t_j = j^{-p}`.
    Power(f64),
}

impl Decay {
    pub fn value(self, j: usize) -> f64 {
        let jf = j as f64;
        match self {
            Decay::Harmonic => 1.0 / jf,
            Decay::Geometric(r) => libm::pow(r, jf),
            Decay::Power(p) => libm::pow(jf, -p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelKind {
    Diagonal { size: usize, decay: Decay },
    /// `k(s, t) = exp(−(s − t)² / width)` on `interval²`.
    GaussianKernel { width: f64, interval: (f64, f64), nodes: usize, rule: Rule },
    /// `A[i][j] = sin(2πW(i − j)) / (π(i − j))`, `A[i][i] = 2W`.
    TimefreqLimiter { size: usize, bandwidth: f64 },
    RandomGaussian { rows: usize, cols: usize, seed: u64 },
    /// Explicit matrix, e.g. read from a file by the caller.
    Dense(DMatrix<f64>),
}

impl ChannelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Diagonal { .. } => "diagonal",
            ChannelKind::GaussianKernel { .. } => "gaussian_kernel",
            ChannelKind::TimefreqLimiter { .. } => "timefreq_limiter",
            ChannelKind::RandomGaussian { .. } => "random_gaussian",
            ChannelKind::Dense(_) => "from_file",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub domain: NormSpec,
    pub codomain: NormSpec,
}

impl ChannelSpec {
    pub fn euclidean(kind: ChannelKind) -> Self {
        ChannelSpec { kind, domain: NormSpec::p2(), codomain: NormSpec::p2() }
    }
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
    }
    Ok(())
}

pub fn make_channel(spec: &ChannelSpec) -> Result<Operator> {
    let matrix = match &spec.kind {
        ChannelKind::Diagonal { size, decay } => {
            positive("size", *size)?;
            DMatrix::from_fn(*size, *size, |i, j| if i == j { decay.value(i + 1) } else { 0.0 })
        }
        ChannelKind::GaussianKernel { width, interval, nodes, rule } => {
            if !(*width > 0.0) {
                return Err(Error::InvalidParameter("kernel width must be positive".into()));
            }
            let w = *width;
            let k = KernelOperator::new(move |s, t| libm::exp(-(s - t) * (s - t) / w), *interval, *interval, *rule)?;
            discretize(&k, *nodes)?.matrix().clone()
        }
        ChannelKind::TimefreqLimiter { size, bandwidth } => timefreq_matrix(*size, *bandwidth)?,
        ChannelKind::RandomGaussian { rows, cols, seed } => {
            positive("rows", *rows)?;
            positive("cols", *cols)?;
            linalg::gaussian_matrix(&mut linalg::rng(*seed, 0), *rows, *cols)
        }
        ChannelKind::Dense(m) => {
            positive("rows", m.nrows())?;
            positive("cols", m.ncols())?;
            m.clone()
        }
    };
    Operator::with_norms(matrix, spec.domain.clone(), spec.codomain.clone())
}

/// Discrete prolate (time–frequency limiting) matrix of the given size.
pub fn timefreq_matrix(size: usize, w: f64) -> Result<DMatrix<f64>> {
    positive("size", size)?;
    if !(w > 0.0 && w < 0.5) {
        return Err(Error::InvalidParameter(format!("bandwidth must lie in (0, 1/2), got {w}")));
    }
    Ok(DMatrix::from_fn(size, size, |i, j| {
        if i == j {
            2.0 * w
        } else {
            let d = i as f64 - j as f64;
            libm::sin(2.0 * PI * w * d) / (PI * d)
        }
    }))
}

/// Shape of the width sequence around `2W·size`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlungeStats {
    /// `#{n : d_n > 0.9}`.
    pub above_high: usize,
    /// `#{n : d_n ≥ 0.1}`.
    pub above_low: usize,
    /// Number of widths in the plunge region `[0.1, 0.9]`.
    pub plunge_width: usize,
    /// Smallest `c` with both plunge edges within `c·ln(size)` of `2W·size`.
    pub log_constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoWtReport {
    pub size: usize,
    pub bandwidth: f64,
    pub eps: f64,
    pub dof: usize,
    pub twowt: f64,
    /// `dof − 2W·size`.
    pub deviation: f64,
    pub plunge: PlungeStats,
}

/// `N(ε)` of the time–frequency limiter against the constant `2W·size`.
pub fn dof_vs_2wt(size: usize, w: f64, eps: f64) -> Result<TwoWtReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter("level must lie in (0, 1)".into()));
    }
    let spec = ChannelSpec::euclidean(ChannelKind::TimefreqLimiter { size, bandwidth: w });
    let t = make_channel(&spec)?;
    let dof = dof_at_level(&t, eps, &SearchConfig::default())?.count;
    let widths = widths_hilbert(&t, size)?.uppers();
    let twowt = 2.0 * w * size as f64;
    let above_high = widths.iter().filter(|&&d| d > 0.9).count();
    let above_low = widths.iter().filter(|&&d| d >= 0.1).count();
    let ln = libm::log(size as f64).max(f64::MIN_POSITIVE);
    let log_constant = libm::fmax(twowt - above_high as f64, above_low as f64 - twowt).max(0.0) / ln;
    Ok(TwoWtReport {
        size,
        bandwidth: w,
        eps,
        dof,
        twowt,
        deviation: dof as f64 - twowt,
        plunge: PlungeStats { above_high, above_low, plunge_width: above_low - above_high, log_constant },
    })
}

/// Named reference operators. Every codomain is ℓ2 and every domain is ℓ2 or
/// polyhedral, so all widths come with tight certified brackets.
pub fn gallery() -> Vec<(String, Operator)> {
    let p2 = NormSpec::p2;
    let specs = [
        ("diag321_p2", ChannelKind::Dense(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![3.0, 2.0, 1.0]))), p2()),
        ("diag321_p1", ChannelKind::Dense(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![3.0, 2.0, 1.0]))), NormSpec::p1()),
        ("harmonic6", ChannelKind::Diagonal { size: 6, decay: Decay::Harmonic }, p2()),
        ("geometric5_p1", ChannelKind::Diagonal { size: 5, decay: Decay::Geometric(0.5) }, NormSpec::p1()),
        ("timefreq24", ChannelKind::TimefreqLimiter { size: 24, bandwidth: 0.2 }, p2()),
        ("gaussian16", ChannelKind::GaussianKernel { width: 0.02, interval: (0.0, 1.0), nodes: 16, rule: Rule::GaussLegendre }, p2()),
        ("random5x4", ChannelKind::RandomGaussian { rows: 5, cols: 4, seed: 7 }, p2()),
        ("random4x4_p1", ChannelKind::RandomGaussian { rows: 4, cols: 4, seed: 8 }, NormSpec::p1()),
        ("random3x3_pinf", ChannelKind::RandomGaussian { rows: 3, cols: 3, seed: 9 }, NormSpec::pinf()),
        ("zero3", ChannelKind::Dense(DMatrix::zeros(3, 3)), p2()),
    ];
    specs
        .into_iter()
        .map(|(name, kind, domain)| {
            let op = make_channel(&ChannelSpec { kind, domain, codomain: NormSpec::p2() }).expect("gallery specs are valid");
            (String::from(name), op)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::NormKind;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_harmonic() {
        let t = make_channel(&ChannelSpec::euclidean(ChannelKind::Diagonal { size: 4, decay: Decay::Harmonic })).unwrap();
        let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![1.0, 0.5, 1.0 / 3.0, 0.25]));
        assert_eq!(t.matrix(), &expect);
    }

    #[test]
    fn limiter_formula() {
        let m = timefreq_matrix(2, 0.25).unwrap();
        assert_abs_diff_eq!(m[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(0, 1)], 1.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 0)], 1.0 / PI, epsilon = 1e-15);
        assert!(timefreq_matrix(4, 0.5).is_err());
        assert!(timefreq_matrix(4, 0.0).is_err());
    }

    #[test]
    fn limiter_spectrum_in_unit_interval() {
        let m = timefreq_matrix(64, 0.15).unwrap();
        assert_eq!(m, m.transpose());
        let s = linalg::singular_values(&m);
        assert!(s.iter().all(|v| *v <= 1.0 + 1e-9));
    }

    #[test]
    fn random_is_deterministic() {
        let spec = ChannelSpec::euclidean(ChannelKind::RandomGaussian { rows: 3, cols: 5, seed: 42 });
        assert_eq!(make_channel(&spec).unwrap(), make_channel(&spec).unwrap());
    }

    #[test]
    fn twowt_examples() {
        let r = dof_vs_2wt(256, 0.1, 0.5).unwrap();
        assert_eq!(r.dof, 51);
        assert!(libm::fabs(r.deviation) <= 3.0);
        let r = dof_vs_2wt(256, 1.0 / 512.0, 0.5).unwrap();
        assert!(r.dof <= 2);
        let small = make_channel(&ChannelSpec::euclidean(ChannelKind::TimefreqLimiter { size: 4, bandwidth: 0.05 })).unwrap();
        let d1 = widths_hilbert(&small, 1).unwrap().uppers()[0];
        assert!(d1 < 1.0);
        assert_eq!(dof_vs_2wt(4, 0.05, d1).unwrap().dof, 0);
    }

    #[test]
    fn gallery_is_valid() {
        let g = gallery();
        assert!(g.len() >= 8);
        assert!(g.iter().all(|(_, t)| t.codomain().norm.kind() == NormKind::P2));
    }
}
