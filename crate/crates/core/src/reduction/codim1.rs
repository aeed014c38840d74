//! The route for a manifold `{φ = 0}` of co-dimension one, with `f = φ·r`.
//!
//! With `g = ∇φ`, `R = ∂r/∂x`, `Φ = ∇²φ` and `λ = gᵀr` on Γ:
//!
//! ```text
//! P     = I − r gᵀ / λ
//! Q_ijk = −( r_i [PᵀΦP]_jk + g_j (PRP)_ik + g_k (PRP)_ij ) / λ − g_j g_k (PRr)_i / λ²
//! ```

use nalgebra::{DMatrix, DVector};

use super::CurvatureTensor;
use crate::diff::FdStep;
use crate::error::{Error, Result};
use crate::manifold::{CoDimOneChart, CoDimOneDerivatives};

/// `(P, Q, λ)` at a point of Γ.
pub fn reduce_codim1(chart: &CoDimOneChart, z: &DVector<f64>, step: FdStep) -> Result<(DMatrix<f64>, CurvatureTensor, f64)> {
    let ders = chart.derivatives(z, step)?;
    codim1_from_derivatives(&ders)
}

pub fn codim1_from_derivatives(ders: &CoDimOneDerivatives) -> Result<(DMatrix<f64>, CurvatureTensor, f64)> {
    let CoDimOneDerivatives {
        r,
        grad_phi: g,
        r_jacobian: rj,
        phi_hessian: phi,
    } = ders;
    let d = r.len();
    if g.len() != d || rj.shape() != (d, d) || phi.shape() != (d, d) {
        return Err(Error::Shape("co-dimension-one derivatives have inconsistent sizes".into()));
    }
    let lambda = g.dot(r);
    if !(lambda < 0.0) {
        return Err(Error::UnstableManifold { lambda });
    }
    let p = DMatrix::identity(d, d) - r * g.transpose() / lambda;
    let ptphip = p.transpose() * phi * &p;
    let prp = &p * rj * &p;
    let prr = &p * rj * r;
    let slices = (0..d)
        .map(|i| {
            DMatrix::from_fn(d, d, |j, k| {
                -(r[i] * ptphip[(j, k)] + g[j] * prp[(i, k)] + g[k] * prp[(i, j)]) / lambda
                    - g[j] * g[k] * prr[i] / (lambda * lambda)
            })
        })
        .collect();
    Ok((p, CurvatureTensor::from_slices(slices)?, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_factorization() {
        let chart = CoDimOneChart::new(|x| -x[0], |_| DVector::from_vec(vec![1.0, 0.0]));
        let (p, q, lambda) = reduce_codim1(&chart, &DVector::from_vec(vec![0.0, 0.7]), FdStep::Auto).unwrap();
        assert!((lambda + 1.0).abs() < 1e-9);
        assert!((p - DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]))).amax() < 1e-9);
        assert!(q.amax() < 1e-6);
    }

    #[test]
    fn repelling_is_rejected() {
        let chart = CoDimOneChart::new(|x| x[0], |_| DVector::from_vec(vec![1.0, 0.0]));
        let err = reduce_codim1(&chart, &DVector::from_vec(vec![0.0, 0.7]), FdStep::Auto).unwrap_err();
        assert!(matches!(err, Error::UnstableManifold { .. }));
    }
}
