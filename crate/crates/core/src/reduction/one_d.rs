//! The route for a one-dimensional manifold given by a chart `s ↦ γ(s)`.
//!
//! Here π factors as `γ∘σ` for a scalar map σ with `σ(γ(s)) = s`, so
//! `P = γ' ∇σᵀ` and `Q_i = γ'_i ∇²σ + γ''_i ∇σ ∇σᵀ`. The row `∇σ` and the
//! matrix `∇²σ` are what [`q_1d`] returns.

use nalgebra::{DMatrix, DVector};

use super::general::lyapunov_solve;
use super::CurvatureTensor;
use crate::error::{Error, Result};
use crate::linalg::EigenSplit;
use crate::manifold::CurveChart;
use crate::model::{Jet, JetOptions, SdeSystem};

#[derive(Debug, Clone)]
pub struct LocalFrame1D {
    pub z_scalar: f64,
    pub gamma: DVector<f64>,
    pub gamma_prime: DVector<f64>,
    pub gamma_second: DVector<f64>,
    /// Left null vector of `J(γ(s))`.
    pub v: DVector<f64>,
    /// `dv/ds` along the chart, in the same gauge as `v`.
    pub v_prime: DVector<f64>,
    /// Transverse curvature of the flow field, in the same gauge as `v`.
    pub theta: DMatrix<f64>,
}

impl LocalFrame1D {
    /// `v · γ'`.
    pub fn transversality(&self) -> f64 {
        self.v.dot(&self.gamma_prime)
    }

    /// The same frame after `v ↦ c·v` with `dc/ds = c_prime`.
    pub fn regauged(&self, c: f64, c_prime: f64) -> Self {
        Self {
            v: &self.v * c,
            v_prime: &self.v * c_prime + &self.v_prime * c,
            theta: &self.theta * c,
            ..self.clone()
        }
    }
}

fn unit_left_null(split: &EigenSplit) -> Result<DVector<f64>> {
    let row = split.left_slow_rows()?;
    let v: DVector<f64> = row.row(0).transpose();
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::LinAlg("zero left null vector".into()));
    }
    Ok(v / n)
}

fn require_one_slow(split: &EigenSplit) -> Result<()> {
    if split.slow_dim() != 1 {
        return Err(Error::AmbiguousSlowDirection {
            near_zero: split.slow_dim(),
            expected: Some(1),
        });
    }
    Ok(())
}

/// Builds `(γ, γ', γ'', v, v', Θ)` at chart parameter `s`; `jet` must be evaluated at `γ(s)`.
///
/// `v` is the unit left null vector with `v·γ' > 0`; `v'` differences the same field at
/// `s ± h`, with each neighbour's sign chosen to overlap `v`.
pub fn build_local_frame_1d(
    system: &SdeSystem,
    jet: &Jet,
    chart: &CurveChart,
    s: f64,
    opts: &JetOptions,
) -> Result<LocalFrame1D> {
    require_one_slow(&jet.eigen)?;
    let (gamma_prime, gamma_second) = chart.derivatives(s, opts.fd_step)?;
    let mut v = unit_left_null(&jet.eigen)?;
    let vg = v.dot(&gamma_prime);
    if vg.abs() <= 1e-12 * gamma_prime.norm() {
        return Err(Error::SingularFrame(vg));
    }
    if vg < 0.0 {
        v = -v;
    }

    let split_opts = opts.split.with_slow_dim(1);
    let h = opts.fd_step.scalar_second_order(s);
    let neighbour = |t: f64| -> Result<DVector<f64>> {
        let j = system.jacobian(&chart.point(t), opts.fd_step)?;
        let w = unit_left_null(&EigenSplit::new(&j, &split_opts)?)?;
        Ok(if w.dot(&v) < 0.0 { -w } else { w })
    };
    let v_prime = (neighbour(s + h)? - neighbour(s - h)?) / (2.0 * h);

    let d = jet.dim();
    let p = &gamma_prime * v.transpose() / v.dot(&gamma_prime);
    let fast = DMatrix::identity(d, d) - p;
    let hv = jet
        .hessians
        .iter()
        .zip(v.iter())
        .fold(DMatrix::zeros(d, d), |acc, (h, &vi)| acc + h * vi);
    let x = lyapunov_solve(&jet.eigen, &hv)?;
    let theta = fast.transpose() * x * &fast * 0.5;

    Ok(LocalFrame1D {
        z_scalar: s,
        gamma: jet.point.clone(),
        gamma_prime,
        gamma_second,
        v,
        v_prime,
        theta,
    })
}

/// `(∇σ, ∇²σ)`:
/// `P_k = v_k / (v·γ')` and
/// `Q_jk = (v'_k P_j + v'_j P_k + 2Θ_jk − (2 v'·γ' + v·γ'') P_j P_k) / (v·γ')`.
pub fn q_1d(frame: &LocalFrame1D) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let vg = frame.transversality();
    if vg.abs() <= 1e-12 * frame.v.norm() * frame.gamma_prime.norm() {
        return Err(Error::SingularFrame(vg));
    }
    let p = &frame.v / vg;
    let curl = 2.0 * frame.v_prime.dot(&frame.gamma_prime) + frame.v.dot(&frame.gamma_second);
    let vp = &frame.v_prime;
    let mut q = vp * p.transpose() + &p * vp.transpose() + &frame.theta * 2.0 - &p * p.transpose() * curl;
    q /= vg;
    crate::diff::symmetrize(&mut q);
    Ok((p, q))
}

/// Full `P` and `Q` on the ambient space from the scalar-map derivatives.
pub fn lift_1d(frame: &LocalFrame1D, p_row: &DVector<f64>, q_mat: &DMatrix<f64>) -> Result<(DMatrix<f64>, CurvatureTensor)> {
    let p = &frame.gamma_prime * p_row.transpose();
    let pp = p_row * p_row.transpose();
    let slices = frame
        .gamma_prime
        .iter()
        .zip(frame.gamma_second.iter())
        .map(|(&g1, &g2)| q_mat * g1 + &pp * g2)
        .collect();
    Ok((p, CurvatureTensor::from_slices(slices)?))
}
