//! Eigen-splitting of a Jacobian into slow (zero) and fast (stable) directions.
//!
//! Eigenvalues come from a real Schur decomposition. Eigenvectors are taken as
//! null vectors of `J - λI` (complex SVD), one block per cluster of numerically
//! equal eigenvalues; the zero cluster uses the real kernel of `J` so that the
//! slow basis is real.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOptions {
    /// Eigenvalues with `|λ| < zero_tol_rel·‖J‖_F` count as zero.
    pub zero_tol_rel: f64,
    /// Declared slow dimension, when known.
    pub slow_dim: Option<usize>,
    /// Eigenvector-matrix condition number above which `J` is treated as defective.
    pub cond_limit: f64,
    /// Largest imaginary part tolerated on real-valued outputs (relative to their scale).
    pub imag_tol: f64,
}

impl Default for SplitOptions {
    fn default() -> Self {
        Self {
            zero_tol_rel: 1e-8,
            slow_dim: None,
            cond_limit: 1e12,
            imag_tol: 1e-10,
        }
    }
}

impl SplitOptions {
    pub fn with_slow_dim(mut self, m: usize) -> Self {
        self.slow_dim = Some(m);
        self
    }
}

/// `J = W Λ W⁻¹` with the `m` slow eigenpairs first.
#[derive(Debug, Clone)]
pub struct EigenSplit {
    values: Vec<Complex64>,
    vectors: DMatrix<Complex64>,
    inverse: DMatrix<Complex64>,
    slow_dim: usize,
    condition: f64,
    imag_tol: f64,
}

impl EigenSplit {
    pub fn new(j: &DMatrix<f64>, opts: &SplitOptions) -> Result<Self> {
        let d = j.nrows();
        if j.ncols() != d {
            return Err(Error::Shape(format!("Jacobian is {}x{}", d, j.ncols())));
        }
        let scale = j.norm();
        let zero_tol = opts.zero_tol_rel * scale.max(f64::MIN_POSITIVE);

        let schur = Schur::try_new(j.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::LinAlg("Schur decomposition did not converge".into()))?;
        let mut eig: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| a.norm().total_cmp(&b.norm()));

        let near_zero = eig.iter().filter(|l| l.norm() <= zero_tol).count();
        let m = match opts.slow_dim {
            Some(m) if m > d || near_zero < m => {
                return Err(Error::AmbiguousSlowDirection {
                    near_zero,
                    expected: Some(m),
                })
            }
            // extra near-zero eigenvalues beyond the declared count are treated as fast
            Some(m) => m,
            None if near_zero == 0 => {
                return Err(Error::AmbiguousSlowDirection {
                    near_zero,
                    expected: None,
                })
            }
            None => near_zero,
        };

        let mut fast: Vec<Complex64> = eig[m..].to_vec();
        fast.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

        let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(d);
        let mut values = Vec::with_capacity(d);

        // slow block: real kernel of J
        if m > 0 {
            let kernel = smallest_right_singular_vectors_real(j, m)?;
            for col in kernel {
                columns.push(col.into_iter().map(|v| Complex64::new(v, 0.0)).collect());
                values.push(Complex64::new(0.0, 0.0));
            }
        }

        // fast block, clustered
        let cluster_tol = 1e-7 * scale.max(1e-300);
        let jc = j.map(|v| Complex64::new(v, 0.0));
        let mut i = 0;
        while i < fast.len() {
            let mut end = i + 1;
            while end < fast.len() && (fast[end] - fast[i]).norm() <= cluster_tol {
                end += 1;
            }
            let k = end - i;
            let lambda = fast[i..end].iter().sum::<Complex64>() / k as f64;
            let shifted = &jc - DMatrix::from_diagonal_element(d, d, lambda);
            for col in smallest_right_singular_vectors_complex(&shifted, k)? {
                columns.push(col);
                values.push(lambda);
            }
            i = end;
        }

        let mut vectors = DMatrix::<Complex64>::zeros(d, d);
        for (c, col) in columns.iter().enumerate() {
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for (r, z) in col.iter().enumerate() {
                vectors[(r, c)] = *z / norm;
            }
        }

        let sv = vectors.clone().svd(false, false).singular_values;
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= opts.cond_limit) {
            return Err(Error::DefectiveJacobian { condition });
        }
        let inverse = vectors
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::LinAlg("eigenvector matrix is singular".into()))?;

        Ok(Self {
            values,
            vectors,
            inverse,
            slow_dim: m,
            condition,
            imag_tol: opts.imag_tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn slow_dim(&self) -> usize {
        self.slow_dim
    }

    pub fn fast_dim(&self) -> usize {
        self.dim() - self.slow_dim
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn fast_values(&self) -> &[Complex64] {
        &self.values[self.slow_dim..]
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn inverse(&self) -> &DMatrix<Complex64> {
        &self.inverse
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn imag_tol(&self) -> f64 {
        self.imag_tol
    }

    /// Right eigenvectors spanning the tangent plane, as real columns (`d×m`).
    pub fn slow_basis(&self) -> DMatrix<f64> {
        self.vectors.columns(0, self.slow_dim).map(|z| z.re)
    }

    /// Rows of `W⁻¹` belonging to the slow block: left null vectors of `J` (`m×d`).
    pub fn left_slow_rows(&self) -> Result<DMatrix<f64>> {
        real_checked(
            &self.inverse.rows(0, self.slow_dim).into_owned(),
            self.imag_tol,
            "left null vectors",
        )
    }

    /// Largest real part among the fast eigenvalues (must be negative on an attracting manifold).
    pub fn fast_abscissa(&self) -> Option<f64> {
        self.fast_values().iter().map(|l| l.re).reduce(f64::max)
    }

    /// Pseudo-inverse `W Λ⁺ W⁻¹`.
    pub fn pseudo_inverse(&self) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let mut scaled = self.inverse.clone();
        for a in 0..d {
            let inv = if a < self.slow_dim {
                Complex64::new(0.0, 0.0)
            } else {
                self.values[a].inv()
            };
            for c in 0..d {
                scaled[(a, c)] *= inv;
            }
        }
        real_checked(&(&self.vectors * scaled), self.imag_tol, "pseudo-inverse")
    }

    /// Spectral projector onto the fast subspace, `W diag(0..0,1..1) W⁻¹`.
    pub fn fast_projector(&self) -> Result<DMatrix<f64>> {
        let f = self.fast_dim();
        let w = self.vectors.columns(self.slow_dim, f);
        let wi = self.inverse.rows(self.slow_dim, f);
        real_checked(&(w * wi), self.imag_tol, "fast projector")
    }
}

/// Drops imaginary parts after checking they are negligible relative to the real scale.
pub fn real_checked(m: &DMatrix<Complex64>, tol: f64, what: &str) -> Result<DMatrix<f64>> {
    let re = m.map(|z| z.re);
    let im = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let scale = re.amax().max(1.0);
    if im > tol * scale {
        return Err(Error::LinAlg(format!(
            "{what} has imaginary part {im:.3e} (tolerance {:.1e})",
            tol * scale
        )));
    }
    Ok(re)
}

fn smallest_right_singular_vectors_real(a: &DMatrix<f64>, k: usize) -> Result<Vec<Vec<f64>>> {
    let svd = a.clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::LinAlg("SVD failed to produce right singular vectors".into()))?;
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    Ok(idx
        .into_iter()
        .take(k)
        .map(|r| v_t.row(r).iter().copied().collect())
        .collect())
}

fn smallest_right_singular_vectors_complex(
    a: &DMatrix<Complex64>,
    k: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let svd = a.clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::LinAlg("SVD failed to produce right singular vectors".into()))?;
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    // rows of v_t are conjugated right singular vectors
    Ok(idx
        .into_iter()
        .take(k)
        .map(|r| v_t.row(r).iter().map(|z| z.conj()).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(s: &EigenSplit) -> DMatrix<f64> {
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s.values().to_vec()));
        (s.vectors() * lam * s.inverse()).map(|z| z.re)
    }

    #[test]
    fn splits_diagonal_matrix() {
        let j = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, -1.0]));
        let s = EigenSplit::new(&j, &SplitOptions::default()).unwrap();
        assert_eq!(s.slow_dim(), 1);
        assert!((s.pseudo_inverse().unwrap() - DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -1.0])).amax() < 1e-14);
    }

    #[test]
    fn reconstructs_matrix_with_complex_fast_pair() {
        let j = DMatrix::from_row_slice(3, 3, &[0.0, 0.3, 0.1, 0.0, -1.0, 2.0, 0.0, -2.0, -1.0]);
        let s = EigenSplit::new(&j, &SplitOptions::default()).unwrap();
        assert_eq!(s.slow_dim(), 1);
        assert!(s.fast_values().iter().all(|l| l.im.abs() > 1.0));
        assert!((reconstruct(&s) - &j).amax() < 1e-12);
        let jp = s.pseudo_inverse().unwrap();
        assert!((&j * &jp * &j - &j).amax() < 1e-12);
        assert!((&jp * &j * &jp - &jp).amax() < 1e-12);
    }

    #[test]
    fn repeated_fast_eigenvalue() {
        let j = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 0.0, -1.0]));
        let s = EigenSplit::new(&j, &SplitOptions::default()).unwrap();
        assert_eq!(s.slow_dim(), 1);
        assert_eq!(s.fast_dim(), 2);
        assert!((reconstruct(&s) - &j).amax() < 1e-14);
    }

    #[test]
    fn jordan_block_is_defective() {
        let j = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, -1.0]);
        let err = EigenSplit::new(&j, &SplitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DefectiveJacobian { .. }), "{err}");
    }

    #[test]
    fn no_zero_eigenvalue_is_ambiguous() {
        let j = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-2.0, -1.0]));
        assert!(matches!(
            EigenSplit::new(&j, &SplitOptions::default()),
            Err(Error::AmbiguousSlowDirection { near_zero: 0, .. })
        ));
        assert!(matches!(
            EigenSplit::new(&j, &SplitOptions::default().with_slow_dim(1)),
            Err(Error::AmbiguousSlowDirection { .. })
        ));
    }
}
