//! Central finite differences for vector fields, scalar fields and curves.
//!
//! All second-derivative routines return symmetrized matrices; the averaging
//! `(A + Aᵀ)/2` makes them exactly symmetric in floating point.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// Step-size policy for finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FdStep {
    /// `sqrt(eps)·(1+‖z‖)` for first derivatives, `cbrt(eps)·(1+‖z‖)` for second.
    #[default]
    Auto,
    Fixed(f64),
}

impl FdStep {
    pub fn first_order(self, x: &DVector<f64>) -> f64 {
        match self {
            FdStep::Auto => f64::EPSILON.sqrt() * (1.0 + x.amax()),
            FdStep::Fixed(h) => h,
        }
    }

    pub fn second_order(self, x: &DVector<f64>) -> f64 {
        match self {
            FdStep::Auto => f64::EPSILON.cbrt() * (1.0 + x.amax()),
            FdStep::Fixed(h) => h,
        }
    }

    pub fn scalar_second_order(self, s: f64) -> f64 {
        match self {
            FdStep::Auto => f64::EPSILON.cbrt() * (1.0 + s.abs()),
            FdStep::Fixed(h) => h,
        }
    }
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for k in (j + 1)..n {
            let avg = 0.5 * (m[(j, k)] + m[(k, j)]);
            m[(j, k)] = avg;
            m[(k, j)] = avg;
        }
    }
}

/// Jacobian `∂f_i/∂x_j` of a vector field by central differences.
pub fn jacobian<F>(f: F, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    let mut xp = x.clone();
    for j in 0..n {
        xp[j] = x[j] + h;
        let fp = f(&xp)?;
        xp[j] = x[j] - h;
        let fm = f(&xp)?;
        xp[j] = x[j];
        cols.push((fp - fm) / (2.0 * h));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Gradient of a scalar field by central differences.
pub fn gradient<F>(f: F, x: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    let mut g = DVector::zeros(x.len());
    let mut xp = x.clone();
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let fp = f(&xp)?;
        xp[j] = x[j] - h;
        let fm = f(&xp)?;
        xp[j] = x[j];
        g[j] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Hessians `H_i[j][k] = ∂²f_i/∂x_j∂x_k` from an exact Jacobian, by differencing it once.
pub fn hessians_from_jacobian<F>(jac: F, x: &DVector<f64>, h: f64) -> Result<Vec<DMatrix<f64>>>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    let n = x.len();
    let mut xp = x.clone();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for k in 0..n {
        xp[k] = x[k] + h;
        plus.push(jac(&xp)?);
        xp[k] = x[k] - h;
        minus.push(jac(&xp)?);
        xp[k] = x[k];
    }
    let m = plus.first().map_or(0, |j| j.nrows());
    let mut out = vec![DMatrix::zeros(n, n); m];
    for (i, hi) in out.iter_mut().enumerate() {
        for j in 0..n {
            for k in 0..n {
                hi[(j, k)] = (plus[k][(i, j)] - minus[k][(i, j)]) / (2.0 * h);
            }
        }
        symmetrize(hi);
    }
    Ok(out)
}

/// Hessians of every component of a vector field from function values only.
pub fn hessians<F>(f: F, x: &DVector<f64>, h: f64) -> Result<Vec<DMatrix<f64>>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = x.len();
    let f0 = f(x)?;
    let m = f0.len();
    let mut out = vec![DMatrix::zeros(n, n); m];
    let mut xp = x.clone();
    for j in 0..n {
        xp[j] = x[j] + h;
        let fp = f(&xp)?;
        xp[j] = x[j] - h;
        let fm = f(&xp)?;
        xp[j] = x[j];
        for i in 0..m {
            out[i][(j, j)] = (fp[i] - 2.0 * f0[i] + fm[i]) / (h * h);
        }
        for k in (j + 1)..n {
            let mut eval = |sj: f64, sk: f64| {
                xp[j] = x[j] + sj * h;
                xp[k] = x[k] + sk * h;
                let v = f(&xp);
                xp[j] = x[j];
                xp[k] = x[k];
                v
            };
            let fpp = eval(1.0, 1.0)?;
            let fpm = eval(1.0, -1.0)?;
            let fmp = eval(-1.0, 1.0)?;
            let fmm = eval(-1.0, -1.0)?;
            for i in 0..m {
                let v = (fpp[i] - fpm[i] - fmp[i] + fmm[i]) / (4.0 * h * h);
                out[i][(j, k)] = v;
                out[i][(k, j)] = v;
            }
        }
    }
    Ok(out)
}

/// Hessian of a scalar field from values.
pub fn scalar_hessian<F>(f: F, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    let mut hs = hessians(|y| Ok(DVector::from_element(1, f(y)?)), x, h)?;
    Ok(hs.remove(0))
}

/// First and second derivative of a curve `s ↦ γ(s)`.
pub fn curve_derivatives<F>(gamma: F, s: f64, h: f64) -> Result<(DVector<f64>, DVector<f64>)>
where
    F: Fn(f64) -> Result<DVector<f64>>,
{
    let gp = gamma(s + h)?;
    let g0 = gamma(s)?;
    let gm = gamma(s - h)?;
    let first = (&gp - &gm) / (2.0 * h);
    let second = (gp - 2.0 * g0 + gm) / (h * h);
    Ok((first, second))
}
