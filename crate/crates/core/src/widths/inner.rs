//! Inner suprema over the domain unit ball, in unweighted coordinates.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::Reduced;
use crate::spaces::{best_fit, sign_vectors, NormKind};

/// How the domain unit ball is explored.
#[derive(Debug, Clone)]
pub(crate) enum Ball {
    /// Extreme points (one per ± pair) and their images `M x`.
    Finite { points: DMatrix<f64>, images: DMatrix<f64> },
    /// Euclidean ball: handled spectrally or by ascent.
    Sphere,
    /// ℓ∞ ball above the enumeration cap: sign coordinate ascent.
    Signs,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct InnerConfig {
    pub sign_cap: usize,
    pub sign_restarts: usize,
    pub ascent_restarts: usize,
    pub seed: u64,
}

impl Ball {
    pub fn new(red: &Reduced, sign_cap: usize) -> Ball {
        let cols = red.m.ncols();
        match red.domain {
            NormKind::P2 => Ball::Sphere,
            NormKind::P1 => {
                let points = DMatrix::identity(cols, cols);
                Ball::Finite { images: red.m.clone(), points }
            }
            NormKind::PInf => {
                if cols > sign_cap {
                    return Ball::Signs;
                }
                let signs: Vec<DVector<f64>> = sign_vectors(cols).map(DVector::from_vec).collect();
                let points = linalg::from_columns(cols, &signs);
                Ball::Finite { images: &red.m * &points, points }
            }
        }
    }
}

/// Value of `sup_{x ∈ B} dist(Mx, span U)` with its maximizer.
#[derive(Debug, Clone)]
pub(crate) struct InnerSup {
    pub value: f64,
    pub certified: bool,
    pub worst: DVector<f64>,
}

/// Distance of `y` to the span of orthonormal `u` in the unweighted norm.
pub(crate) fn dist(kind: NormKind, y: &DVector<f64>, u: &DMatrix<f64>) -> Result<f64> {
    if kind == NormKind::P2 {
        let c = u.transpose() * y;
        return Ok((y - u * c).norm());
    }
    Ok(best_fit(kind, y, u)?.distance)
}

pub(crate) fn quotient(red: &Reduced, ball: &Ball, u: &DMatrix<f64>, cfg: &InnerConfig) -> Result<InnerSup> {
    match ball {
        Ball::Finite { points, images } => {
            let mut best = -1.0;
            let mut arg = 0;
            if red.codomain == NormKind::P2 {
                let resid = images - u * (u.transpose() * images);
                for j in 0..resid.ncols() {
                    let d = resid.column(j).norm();
                    if d > best {
                        best = d;
                        arg = j;
                    }
                }
            } else {
                for j in 0..images.ncols() {
                    let d = dist(red.codomain, &images.column(j).clone_owned(), u)?;
                    if d > best {
                        best = d;
                        arg = j;
                    }
                }
            }
            Ok(InnerSup { value: best.max(0.0), certified: true, worst: points.column(arg).clone_owned() })
        }
        Ball::Sphere => {
            let resid = &red.m - u * (u.transpose() * &red.m);
            if red.codomain == NormKind::P2 {
                let (_, s, v) = linalg::sorted_svd(&resid);
                let worst = if v.ncols() > 0 { v.column(0).clone_owned() } else { DVector::zeros(red.m.ncols()) };
                return Ok(InnerSup { value: s.first().copied().unwrap_or(0.0), certified: true, worst });
            }
            sphere_ascent(red, u, &resid, cfg)
        }
        Ball::Signs => sign_ascent(red, u, cfg),
    }
}

/// Conditional-gradient ascent of the convex map `x ↦ dist(Mx, S)` on the
/// Euclidean sphere: `x ← Mᵀξ / ‖Mᵀξ‖` with `ξ` the dual certificate.
fn sphere_ascent(red: &Reduced, u: &DMatrix<f64>, resid: &DMatrix<f64>, cfg: &InnerConfig) -> Result<InnerSup> {
    let cols = red.m.ncols();
    let mut starts: Vec<DVector<f64>> = Vec::new();
    let (_, _, v) = linalg::sorted_svd(resid);
    for j in 0..v.ncols().min(3) {
        starts.push(v.column(j).clone_owned());
    }
    let mut rng = linalg::rng(cfg.seed, 0x5eed_a5ce);
    for _ in 0..cfg.ascent_restarts {
        let g = DVector::from_fn(cols, |_, _| linalg::gaussian(&mut rng));
        let n = g.norm();
        if n > 0.0 {
            starts.push(g / n);
        }
    }
    let mut best = InnerSup { value: -1.0, certified: false, worst: DVector::zeros(cols) };
    for x0 in starts {
        let mut x = x0;
        let mut fit = best_fit(red.codomain, &(&red.m * &x), u)?;
        for _ in 0..100 {
            let g = red.m.transpose() * &fit.dual;
            let gn = g.norm();
            if gn == 0.0 {
                break;
            }
            let xn = g / gn;
            let fit_n = best_fit(red.codomain, &(&red.m * &xn), u)?;
            if fit_n.distance <= fit.distance * (1.0 + 1e-15) {
                break;
            }
            x = xn;
            fit = fit_n;
        }
        if fit.distance > best.value {
            best = InnerSup { value: fit.distance, certified: false, worst: x };
        }
    }
    best.value = best.value.max(0.0);
    Ok(best)
}

/// Sign coordinate ascent on `s ↦ dist(M s, S)` over `{±1}^cols`.
fn sign_ascent(red: &Reduced, u: &DMatrix<f64>, cfg: &InnerConfig) -> Result<InnerSup> {
    let cols = red.m.ncols();
    let mut rng = linalg::rng(cfg.seed, 0x5167_a5ce);
    let resid = &red.m - u * (u.transpose() * &red.m);
    let (_, _, v) = linalg::sorted_svd(&resid);
    let mut best = InnerSup { value: -1.0, certified: false, worst: DVector::zeros(cols) };
    for r in 0..cfg.sign_restarts.max(1) {
        let mut s: DVector<f64> = if r == 0 && v.ncols() > 0 {
            v.column(0).map(|x| if x >= 0.0 { 1.0 } else { -1.0 })
        } else {
            DVector::from_fn(cols, |_, _| if linalg::uniform(&mut rng) < 0.5 { 1.0 } else { -1.0 })
        };
        let mut val = dist(red.codomain, &(&red.m * &s), u)?;
        loop {
            let mut improved = false;
            for i in 0..cols {
                s[i] = -s[i];
                let cand = dist(red.codomain, &(&red.m * &s), u)?;
                if cand > val * (1.0 + 1e-15) + 1e-300 {
                    val = cand;
                    improved = true;
                } else {
                    s[i] = -s[i];
                }
            }
            if !improved {
                break;
            }
        }
        if val > best.value {
            best = InnerSup { value: val, certified: false, worst: s };
        }
    }
    Ok(best)
}

/// Operator norm in unweighted coordinates: `(value, certified)`.
///
/// Exact whenever either the domain ball or the dual codomain ball has an
/// enumerable extreme set, or both norms are Euclidean.
pub(crate) fn operator_norm(red: &Reduced, cfg: &InnerConfig) -> Result<(f64, bool)> {
    let m = &red.m;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok((0.0, true));
    }
    let col_norm = |j: usize| red.codomain.eval(m.column(j).clone_owned().as_slice());
    let row_dual = |i: usize| red.domain.dual().eval(m.row(i).transpose().as_slice());
    match (red.domain, red.codomain) {
        (NormKind::P1, _) => Ok(((0..m.ncols()).map(col_norm).fold(0.0, f64::max), true)),
        (_, NormKind::PInf) => Ok(((0..m.nrows()).map(row_dual).fold(0.0, f64::max), true)),
        (NormKind::P2, NormKind::P2) => Ok((linalg::singular_values(m)[0], true)),
        (NormKind::PInf, _) if m.ncols() <= cfg.sign_cap => {
            let mut best = 0.0f64;
            for s in sign_vectors(m.ncols()) {
                let y = m * DVector::from_vec(s);
                best = best.max(red.codomain.eval(y.as_slice()));
            }
            Ok((best, true))
        }
        (_, NormKind::P1) if m.nrows() <= cfg.sign_cap => {
            // ‖T‖ = ‖Tᵀ‖ with the dual codomain ball = ℓ∞ cube
            let mut best = 0.0f64;
            for s in sign_vectors(m.nrows()) {
                let g = m.transpose() * DVector::from_vec(s);
                best = best.max(red.domain.dual().eval(g.as_slice()));
            }
            Ok((best, true))
        }
        _ => {
            let u = DMatrix::zeros(m.nrows(), 0);
            let sup = match red.domain {
                NormKind::PInf => sign_ascent(red, &u, cfg)?,
                _ => sphere_ascent(red, &u, m, cfg)?,
            };
            Ok((sup.value, false))
        }
    }
}

pub(crate) fn check_cap(red: &Reduced, cfg: &InnerConfig) -> Result<()> {
    if red.domain == NormKind::PInf && red.m.ncols() > cfg.sign_cap {
        return Err(Error::CapExceeded { dim: red.m.ncols(), cap: cfg.sign_cap });
    }
    Ok(())
}
