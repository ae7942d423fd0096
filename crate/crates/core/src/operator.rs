use alloc::format;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spaces::{NormKind, NormSpec, SpaceModel};

/// A channel map `T: X → Y` given by a dense matrix (rows = dim Y, cols = dim X).
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<f64>,
    domain: SpaceModel,
    codomain: SpaceModel,
}

impl Operator {
    pub fn new(matrix: DMatrix<f64>, domain: SpaceModel, codomain: SpaceModel) -> Result<Self> {
        if matrix.ncols() != domain.dim {
            return Err(Error::DimensionMismatch { expected: domain.dim, found: matrix.ncols() });
        }
        if matrix.nrows() != codomain.dim {
            return Err(Error::DimensionMismatch { expected: codomain.dim, found: matrix.nrows() });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Operator { matrix, domain, codomain })
    }

    /// Operator with the given matrix and norm specs on both sides.
    pub fn with_norms(matrix: DMatrix<f64>, domain: NormSpec, codomain: NormSpec) -> Result<Self> {
        let d = SpaceModel::new(matrix.ncols(), domain)?;
        let c = SpaceModel::new(matrix.nrows(), codomain)?;
        Self::new(matrix, d, c)
    }

    /// Euclidean operator `ℓ2 → ℓ2`.
    pub fn euclidean(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_norms(matrix, NormSpec::p2(), NormSpec::p2())
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn domain(&self) -> &SpaceModel {
        &self.domain
    }

    pub fn codomain(&self) -> &SpaceModel {
        &self.codomain
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_hilbert(&self) -> bool {
        self.domain.norm.kind() == NormKind::P2 && self.codomain.norm.kind() == NormKind::P2
    }

    /// `other ∘ self`; requires the codomain of `self` to be the domain of `other`.
    pub fn then(&self, other: &Operator) -> Result<Operator> {
        if self.codomain != other.domain {
            return Err(Error::InvalidParameter(format!(
                "cannot compose: codomain {}^{} does not match domain {}^{}",
                self.codomain.norm.kind().name(),
                self.codomain.dim,
                other.domain.norm.kind().name(),
                other.domain.dim
            )));
        }
        Operator::new(&other.matrix * &self.matrix, self.domain.clone(), other.codomain.clone())
    }

    /// Sum of two operators with identical spaces.
    pub fn add(&self, other: &Operator) -> Result<Operator> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::InvalidParameter("cannot add operators between different spaces".into()));
        }
        Operator::new(&self.matrix + &other.matrix, self.domain.clone(), self.codomain.clone())
    }

    pub fn scaled(&self, factor: f64) -> Result<Operator> {
        Operator::new(&self.matrix * factor, self.domain.clone(), self.codomain.clone())
    }

    /// The matrix in unweighted coordinates, `W_Y T W_X⁻¹`.
    pub(crate) fn reduced(&self) -> Reduced {
        let mut m = self.matrix.clone();
        for i in 0..m.nrows() {
            let w = self.codomain.norm.weight(i);
            if w != 1.0 {
                m.row_mut(i).scale_mut(w);
            }
        }
        for j in 0..m.ncols() {
            let w = self.domain.norm.weight(j);
            if w != 1.0 {
                m.column_mut(j).scale_mut(1.0 / w);
            }
        }
        Reduced { m, domain: self.domain.norm.kind(), codomain: self.codomain.norm.kind() }
    }
}

/// Unweighted form of an operator: the diagonal weights are isometries, so
/// every width of `T` equals the width of `W_Y T W_X⁻¹` under plain norms.
#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    pub m: DMatrix<f64>,
    pub domain: NormKind,
    pub codomain: NormKind,
}
