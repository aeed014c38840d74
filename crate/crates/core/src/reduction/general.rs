//! The eigenbasis route, valid for any slow dimension.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CurvatureTensor;
use crate::error::{Error, Result};
use crate::linalg::{real_checked, EigenSplit, SplitOptions};
use crate::model::Jet;

/// `P = I − J⁺J`.
pub fn project_general(jet: &Jet) -> DMatrix<f64> {
    let d = jet.dim();
    DMatrix::identity(d, d) - &jet.pseudo_inverse * &jet.jacobian
}

/// `P = U (VU)⁻¹ V` from right slow vectors `U` (`d×m`) and left null rows `V` (`m×d`).
pub fn projection_from_bases(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let vu = v * u;
    let inv = vu
        .try_inverse()
        .ok_or_else(|| Error::LinAlg("left and right slow bases are not transversal".into()))?;
    Ok(u * inv * v)
}

fn check_attracting(split: &EigenSplit) -> Result<()> {
    match split.fast_abscissa() {
        Some(re) if re >= 0.0 => Err(Error::UnstableManifold { lambda: re }),
        _ => Ok(()),
    }
}

/// Solves `JᵀX + XJ = −(I−P)ᵀ H (I−P)` on the fast subspace.
///
/// In the eigenbasis `X̃ = WᵀXW` decouples into `X̃_ab = −H̃_ab / (λ_a + λ_b)` for fast
/// pairs and zero elsewhere. The result equals `∫₀^∞ (e^{sJ}−P)ᵀ H (e^{sJ}−P) ds`.
pub fn lyapunov_solve(split: &EigenSplit, h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_attracting(split)?;
    let d = split.dim();
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::Shape(format!("H is {}x{}, J is {d}x{d}", h.nrows(), h.ncols())));
    }
    let w = split.vectors();
    let hc = h.map(|v| Complex64::new(v, 0.0));
    let mut xt = w.transpose() * hc * w;
    let m = split.slow_dim();
    let lam = split.values();
    for a in 0..d {
        for b in 0..d {
            if a < m || b < m {
                xt[(a, b)] = Complex64::new(0.0, 0.0);
            } else {
                let s = lam[a] + lam[b];
                if s.norm() == 0.0 {
                    return Err(Error::LinAlg("restricted Lyapunov operator is singular".into()));
                }
                xt[(a, b)] = -xt[(a, b)] / s;
            }
        }
    }
    let wi = split.inverse();
    let x = wi.transpose() * xt * wi;
    let mut x = real_checked(&x, split.imag_tol(), "Lyapunov solution")?;
    crate::diff::symmetrize(&mut x);
    Ok(x)
}

/// [`lyapunov_solve`] for a bare matrix pair.
pub fn lyapunov_solve_matrix(j: &DMatrix<f64>, h: &DMatrix<f64>, opts: &SplitOptions) -> Result<DMatrix<f64>> {
    lyapunov_solve(&EigenSplit::new(j, opts)?, h)
}

/// `‖JᵀX + XJ + (I−P)ᵀH(I−P)‖_∞`.
pub fn lyapunov_residual(j: &DMatrix<f64>, x: &DMatrix<f64>, h: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let d = j.nrows();
    let f = DMatrix::identity(d, d) - p;
    (j.transpose() * x + x * j + f.transpose() * h * &f).amax()
}

/// `Q_ijk = Σ_l −J⁺_il [PᵀH_lP]_jk + P_il [X_l − J⁺ᵀH_lP − PᵀH_lJ⁺]_jk`.
pub fn q_general(jet: &Jet, p: &DMatrix<f64>) -> Result<CurvatureTensor> {
    check_attracting(&jet.eigen)?;
    let d = jet.dim();
    let jp = &jet.pseudo_inverse;
    let pt = p.transpose();
    let jpt = jp.transpose();
    let mut slices = vec![DMatrix::zeros(d, d); d];
    for (l, hl) in jet.hessians.iter().enumerate() {
        if hl.amax() == 0.0 {
            continue;
        }
        let php = &pt * hl * p;
        let x = lyapunov_solve(&jet.eigen, hl)?;
        let inner = x - &jpt * hl * p - &pt * hl * jp;
        for (i, q) in slices.iter_mut().enumerate() {
            let a = -jp[(i, l)];
            let b = p[(i, l)];
            if a != 0.0 {
                *q += &php * a;
            }
            if b != 0.0 {
                *q += &inner * b;
            }
        }
    }
    for q in &mut slices {
        crate::diff::symmetrize(q);
    }
    CurvatureTensor::from_slices(slices)
}

/// `max_jk ‖J·Q_{·jk} + h_jk‖_∞` with `(h_jk)_i = [PᵀH_iP]_jk`.
pub fn a3_residual(j: &DMatrix<f64>, hessians: &[DMatrix<f64>], p: &DMatrix<f64>, q: &CurvatureTensor) -> f64 {
    let d = j.nrows();
    let php: Vec<DMatrix<f64>> = hessians.iter().map(|h| p.transpose() * h * p).collect();
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let jq = j * q.fiber(a, b);
            for i in 0..d {
                worst = worst.max((jq[i] + php[i][(a, b)]).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{eval_jet, JetOptions, SdeSystem};
    use nalgebra::DVector;

    #[test]
    fn diagonal_projection() {
        let s = SdeSystem::builder(2, 1)
            .outer(|x, o| {
                o[0] = 0.0;
                o[1] = -x[1];
            })
            .build()
            .unwrap();
        let jet = eval_jet(&s, &DVector::from_vec(vec![0.4, 0.0]), &JetOptions::default()).unwrap();
        let p = project_general(&jet);
        assert!((p - DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]))).amax() < 1e-12);
        assert!(q_general(&jet, &project_general(&jet)).unwrap().amax() < 1e-6);
    }

    #[test]
    fn lyapunov_on_minus_identity() {
        let j = -DMatrix::<f64>::identity(2, 2);
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 4.0]));
        let x = lyapunov_solve_matrix(&j, &h, &SplitOptions::default().with_slow_dim(0)).unwrap();
        assert!((x - DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]))).amax() < 1e-14);
        let zero = lyapunov_solve_matrix(&j, &DMatrix::zeros(2, 2), &SplitOptions::default().with_slow_dim(0)).unwrap();
        assert_eq!(zero.amax(), 0.0);
    }

    #[test]
    fn unstable_fast_direction_is_rejected() {
        let j = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]));
        let err = lyapunov_solve_matrix(&j, &DMatrix::identity(2, 2), &SplitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnstableManifold { .. }));
    }

    #[test]
    fn bases_projection_agrees() {
        let j = DMatrix::from_row_slice(3, 3, &[-1.0, 2.0, 0.5, 0.0, 0.0, 0.0, 0.3, -0.2, -2.0]);
        let split = EigenSplit::new(&j, &SplitOptions::default()).unwrap();
        let p1 = DMatrix::identity(3, 3) - split.pseudo_inverse().unwrap() * &j;
        let p2 = projection_from_bases(&split.slow_basis(), &split.left_slow_rows().unwrap()).unwrap();
        assert!((p1 - p2).amax() < 1e-10);
    }
}
