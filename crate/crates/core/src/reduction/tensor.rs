use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Rank-three array `Q_ijk`, stored as one symmetric `d×d` slice per output index `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    slices: Vec<DMatrix<f64>>,
}

impl CurvatureTensor {
    pub fn zeros(d: usize) -> Self {
        Self {
            slices: vec![DMatrix::zeros(d, d); d],
        }
    }

    pub fn from_slices(slices: Vec<DMatrix<f64>>) -> Result<Self> {
        let d = slices.len();
        if slices.iter().any(|s| s.nrows() != d || s.ncols() != d) {
            return Err(Error::Shape(format!("curvature tensor needs {d} slices of size {d}x{d}")));
        }
        Ok(Self { slices })
    }

    pub fn dim(&self) -> usize {
        self.slices.len()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.slices[i][(j, k)]
    }

    pub fn slice(&self, i: usize) -> &DMatrix<f64> {
        &self.slices[i]
    }

    pub fn slices(&self) -> &[DMatrix<f64>] {
        &self.slices
    }

    /// The vector `Q_{·jk}`.
    pub fn fiber(&self, j: usize, k: usize) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.slices.iter().map(|s| s[(j, k)]))
    }

    pub fn amax(&self) -> f64 {
        self.slices.iter().map(|s| s.amax()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max)
    }

    /// Largest `|Q_ijk − Q_ikj|`.
    pub fn symmetry_defect(&self) -> f64 {
        self.slices
            .iter()
            .map(|s| (s - s.transpose()).amax())
            .fold(0.0, f64::max)
    }

    /// `½ Σ_jk D_jk Q_ijk` for a symmetric `D` (typically `G Gᵀ`).
    pub fn half_contract(&self, d: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.slices.iter().map(|s| 0.5 * s.dot(d)))
    }

    /// Entries in `(i, j, k)` row-major order.
    pub fn flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.slices.iter().flat_map(|s| s.transpose().into_iter().copied().collect::<Vec<_>>())
    }
}
