//! The full stochastic system `dx = (f + εh) dt + √μ G dW` and pointwise derivative bundles.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::diff::{self, FdStep};
use crate::error::{Error, Result};
use crate::linalg::{EigenSplit, SplitOptions};

pub type FieldFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&[f64], &mut DMatrix<f64>) + Send + Sync>;
pub type HessianFn = Arc<dyn Fn(&[f64], &mut [DMatrix<f64>]) + Send + Sync>;

/// Square root of a rate argument.
///
/// Arguments in `[-floor, 0)` are clamped to zero; anything below `-floor`
/// yields NaN, which the system reports as an evaluation error.
#[inline]
pub fn rate_sqrt(arg: f64, floor: f64) -> f64 {
    if arg >= 0.0 {
        arg.sqrt()
    } else if arg >= -floor {
        0.0
    } else {
        f64::NAN
    }
}

/// An immutable SDE with outer drift `f`, inner drift `h` and noise coupling `G`.
#[derive(Clone)]
pub struct SdeSystem {
    dim: usize,
    noise_dim: usize,
    epsilon: f64,
    mu: f64,
    outer: FieldFn,
    inner: Option<FieldFn>,
    noise: Option<MatrixFn>,
    jacobian: Option<MatrixFn>,
    hessians: Option<HessianFn>,
    label: String,
}

impl fmt::Debug for SdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdeSystem")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("noise_dim", &self.noise_dim)
            .field("epsilon", &self.epsilon)
            .field("mu", &self.mu)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("analytic_hessians", &self.hessians.is_some())
            .finish()
    }
}

pub struct SdeSystemBuilder {
    dim: usize,
    noise_dim: usize,
    epsilon: f64,
    mu: f64,
    outer: Option<FieldFn>,
    inner: Option<FieldFn>,
    noise: Option<MatrixFn>,
    jacobian: Option<MatrixFn>,
    hessians: Option<HessianFn>,
    label: String,
}

impl SdeSystemBuilder {
    pub fn outer(mut self, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.outer = Some(Arc::new(f));
        self
    }

    pub fn inner(mut self, h: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.inner = Some(Arc::new(h));
        self
    }

    pub fn noise(mut self, g: impl Fn(&[f64], &mut DMatrix<f64>) + Send + Sync + 'static) -> Self {
        self.noise = Some(Arc::new(g));
        self
    }

    pub fn jacobian(mut self, j: impl Fn(&[f64], &mut DMatrix<f64>) + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn hessians(
        mut self,
        h: impl Fn(&[f64], &mut [DMatrix<f64>]) + Send + Sync + 'static,
    ) -> Self {
        self.hessians = Some(Arc::new(h));
        self
    }

    pub fn scales(mut self, epsilon: f64, mu: f64) -> Self {
        self.epsilon = epsilon;
        self.mu = mu;
        self
    }

    pub fn label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn build(self) -> Result<SdeSystem> {
        if self.dim == 0 {
            return Err(Error::Config("state dimension must be positive".into()));
        }
        if self.noise_dim == 0 {
            return Err(Error::Config("noise dimension must be positive".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Config(format!("mu must be >= 0, got {}", self.mu)));
        }
        let outer = self
            .outer
            .ok_or_else(|| Error::Config("outer drift f is required".into()))?;
        Ok(SdeSystem {
            dim: self.dim,
            noise_dim: self.noise_dim,
            epsilon: self.epsilon,
            mu: self.mu,
            outer,
            inner: self.inner,
            noise: self.noise,
            jacobian: self.jacobian,
            hessians: self.hessians,
            label: self.label,
        })
    }
}

fn check_finite(what: &str, x: &[f64], values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::eval(what, x))
    }
}

impl SdeSystem {
    pub fn builder(dim: usize, noise_dim: usize) -> SdeSystemBuilder {
        SdeSystemBuilder {
            dim,
            noise_dim,
            epsilon: 0.0,
            mu: 0.0,
            outer: None,
            inner: None,
            noise: None,
            jacobian: None,
            hessians: None,
            label: String::from("custom"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn has_analytic_hessians(&self) -> bool {
        self.hessians.is_some()
    }

    /// Same fields with different time-scale and noise parameters.
    pub fn with_scales(&self, epsilon: f64, mu: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && mu >= 0.0) {
            return Err(Error::Config(format!("scales must be >= 0, got ({epsilon}, {mu})")));
        }
        let mut s = self.clone();
        s.epsilon = epsilon;
        s.mu = mu;
        Ok(s)
    }

    /// Copy with every derivative provider removed, forcing finite differences.
    pub fn without_derivatives(&self) -> Self {
        let mut s = self.clone();
        s.jacobian = None;
        s.hessians = None;
        s
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Shape(format!(
                "state has length {}, system dimension is {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn outer_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (self.outer)(x, out);
        check_finite("outer drift f", x, out)
    }

    pub fn inner_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.inner {
            Some(h) => {
                h(x, out);
                check_finite("inner drift h", x, out)
            }
            None => {
                out.fill(0.0);
                Ok(())
            }
        }
    }

    pub fn noise_into(&self, x: &[f64], out: &mut DMatrix<f64>) -> Result<()> {
        match &self.noise {
            Some(g) => {
                g(x, out);
                check_finite("noise coupling G", x, out.as_slice())
            }
            None => {
                out.fill(0.0);
                Ok(())
            }
        }
    }

    pub fn outer(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x.as_slice())?;
        let mut out = DVector::zeros(self.dim);
        self.outer_into(x.as_slice(), out.as_mut_slice())?;
        Ok(out)
    }

    pub fn inner(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x.as_slice())?;
        let mut out = DVector::zeros(self.dim);
        self.inner_into(x.as_slice(), out.as_mut_slice())?;
        Ok(out)
    }

    pub fn noise(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(x.as_slice())?;
        let mut out = DMatrix::zeros(self.dim, self.noise_dim);
        self.noise_into(x.as_slice(), &mut out)?;
        Ok(out)
    }

    /// Jacobian of `f`: analytic when provided, else central differences.
    pub fn jacobian(&self, x: &DVector<f64>, step: FdStep) -> Result<DMatrix<f64>> {
        self.check_dim(x.as_slice())?;
        match &self.jacobian {
            Some(j) => {
                let mut out = DMatrix::zeros(self.dim, self.dim);
                j(x.as_slice(), &mut out);
                check_finite("Jacobian", x.as_slice(), out.as_slice())?;
                Ok(out)
            }
            None => diff::jacobian(|y| self.outer(y), x, step.first_order(x)),
        }
    }

    /// Symmetric Hessians `H_i = ∂²f_i/∂x²`, one per component.
    pub fn hessians(&self, x: &DVector<f64>, step: FdStep) -> Result<Vec<DMatrix<f64>>> {
        self.check_dim(x.as_slice())?;
        let h = step.second_order(x);
        let mut hs = match (&self.hessians, &self.jacobian) {
            (Some(hf), _) => {
                let mut out = vec![DMatrix::zeros(self.dim, self.dim); self.dim];
                hf(x.as_slice(), &mut out);
                for m in &out {
                    check_finite("Hessian", x.as_slice(), m.as_slice())?;
                }
                out
            }
            (None, Some(_)) => diff::hessians_from_jacobian(|y| self.jacobian(y, step), x, h)?,
            (None, None) => diff::hessians(|y| self.outer(y), x, h)?,
        };
        for m in &mut hs {
            diff::symmetrize(m);
        }
        Ok(hs)
    }
}

/// Derivative bundle of `f` at one point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub point: DVector<f64>,
    pub f_val: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    pub hessians: Vec<DMatrix<f64>>,
    pub eigen: EigenSplit,
    pub pseudo_inverse: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct JetOptions {
    pub fd_step: FdStep,
    pub split: SplitOptions,
}

impl JetOptions {
    pub fn with_slow_dim(mut self, m: usize) -> Self {
        self.split.slow_dim = Some(m);
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = FdStep::Fixed(h);
        self
    }
}

impl Jet {
    pub fn dim(&self) -> usize {
        self.point.len()
    }
}

pub fn eval_jet(system: &SdeSystem, z: &DVector<f64>, opts: &JetOptions) -> Result<Jet> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::eval("jet base point", z.as_slice()));
    }
    if let FdStep::Fixed(h) = opts.fd_step {
        if !(h > 0.0) {
            return Err(Error::Config(format!("finite-difference step must be > 0, got {h}")));
        }
    }
    let f_val = system.outer(z)?;
    let jacobian = system.jacobian(z, opts.fd_step)?;
    let hessians = system.hessians(z, opts.fd_step)?;
    let eigen = EigenSplit::new(&jacobian, &opts.split)?;
    let pseudo_inverse = eigen.pseudo_inverse()?;
    Ok(Jet {
        point: z.clone(),
        f_val,
        jacobian,
        hessians,
        eigen,
        pseudo_inverse,
    })
}

/// `‖f(z)‖_∞ ≤ tol`.
pub fn validate_manifold_point(system: &SdeSystem, z: &DVector<f64>, tol: f64) -> Result<bool> {
    Ok(system.outer(z)?.amax() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> SdeSystem {
        SdeSystem::builder(1, 1)
            .outer(|x, out| out[0] = -x[0])
            .noise(|_, g| g[(0, 0)] = 1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn linear_decay_jet() {
        let s = decay();
        let z = DVector::from_element(1, 0.0);
        // no zero eigenvalue here, so declare none
        let opts = JetOptions {
            split: SplitOptions {
                slow_dim: Some(0),
                ..Default::default()
            },
            ..Default::default()
        };
        let jet = eval_jet(&s, &z, &opts).unwrap();
        assert!((jet.jacobian[(0, 0)] + 1.0).abs() < 1e-9);
        assert!((jet.pseudo_inverse[(0, 0)] + 1.0).abs() < 1e-9);
        assert!(jet.hessians[0][(0, 0)].abs() < 1e-6);
    }

    #[test]
    fn rejects_negative_scales() {
        let err = SdeSystem::builder(1, 1)
            .outer(|x, o| o[0] = x[0])
            .scales(-1.0, 0.0)
            .build()
            .unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn rate_floor_policy() {
        assert_eq!(rate_sqrt(4.0, 0.1), 2.0);
        assert_eq!(rate_sqrt(-0.05, 0.1), 0.0);
        assert!(rate_sqrt(-0.2, 0.1).is_nan());
    }

    #[test]
    fn non_finite_noise_is_an_evaluation_error() {
        let s = SdeSystem::builder(1, 1)
            .outer(|_, o| o[0] = 0.0)
            .noise(|x, g| g[(0, 0)] = rate_sqrt(x[0], 1e-3))
            .build()
            .unwrap();
        assert!(s.noise(&DVector::from_element(1, -0.0005)).is_ok());
        assert!(matches!(
            s.noise(&DVector::from_element(1, -1.0)),
            Err(Error::Evaluation { .. })
        ));
    }

    #[test]
    fn validate_point() {
        let s = decay();
        assert!(validate_manifold_point(&s, &DVector::from_element(1, 0.0), 1e-12).unwrap());
        assert!(!validate_manifold_point(&s, &DVector::from_element(1, 0.1), 1e-12).unwrap());
    }
}
