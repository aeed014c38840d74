//! Descriptions of the slow manifold Γ that select a reduction route.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::diff::{self, FdStep};
use crate::error::{Error, Result};
use crate::model::SdeSystem;

pub type CurveFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;
pub type ScalarFieldFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type VectorFieldFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type MatrixFieldFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// A local chart `s ↦ γ(s)` of a one-dimensional manifold.
#[derive(Clone)]
pub struct CurveChart {
    gamma: CurveFn,
    gamma_prime: Option<CurveFn>,
    gamma_second: Option<CurveFn>,
    parameter_of: Option<ScalarFieldFn>,
}

impl fmt::Debug for CurveChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurveChart")
            .field("analytic_gamma_prime", &self.gamma_prime.is_some())
            .field("analytic_gamma_second", &self.gamma_second.is_some())
            .finish()
    }
}

impl CurveChart {
    pub fn new(gamma: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static) -> Self {
        Self {
            gamma: Arc::new(gamma),
            gamma_prime: None,
            gamma_second: None,
            parameter_of: None,
        }
    }

    pub fn with_derivatives(
        mut self,
        first: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static,
        second: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gamma_prime = Some(Arc::new(first));
        self.gamma_second = Some(Arc::new(second));
        self
    }

    /// Inverse chart: the parameter of a point on (or near) Γ.
    pub fn with_parameter_of(mut self, p: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static) -> Self {
        self.parameter_of = Some(Arc::new(p));
        self
    }

    pub fn point(&self, s: f64) -> DVector<f64> {
        (self.gamma)(s)
    }

    pub fn parameter_of(&self, x: &DVector<f64>) -> Option<f64> {
        self.parameter_of.as_ref().map(|p| p(x))
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.gamma_prime.is_some() && self.gamma_second.is_some()
    }

    /// `(γ'(s), γ''(s))`, analytic when provided.
    pub fn derivatives(&self, s: f64, step: FdStep) -> Result<(DVector<f64>, DVector<f64>)> {
        match (&self.gamma_prime, &self.gamma_second) {
            (Some(g1), Some(g2)) => Ok((g1(s), g2(s))),
            _ => {
                let h = step.scalar_second_order(s);
                diff::curve_derivatives(|t| Ok((self.gamma)(t)), s, h)
            }
        }
    }

    /// Max of `‖f(γ(s))‖_∞` over the given parameters.
    pub fn max_residual(&self, system: &SdeSystem, params: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &s in params {
            worst = worst.max(system.outer(&self.point(s))?.amax());
        }
        Ok(worst)
    }
}

/// Factorization `f = φ·r` of the outer drift near a co-dimension-one manifold `{φ = 0}`.
#[derive(Clone)]
pub struct CoDimOneChart {
    phi: ScalarFieldFn,
    r: VectorFieldFn,
    grad_phi: Option<VectorFieldFn>,
    r_jacobian: Option<MatrixFieldFn>,
    phi_hessian: Option<MatrixFieldFn>,
}

impl fmt::Debug for CoDimOneChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoDimOneChart")
            .field("analytic_grad_phi", &self.grad_phi.is_some())
            .field("analytic_r_jacobian", &self.r_jacobian.is_some())
            .field("analytic_phi_hessian", &self.phi_hessian.is_some())
            .finish()
    }
}

/// First and second derivatives of a co-dimension-one factorization at a point.
#[derive(Debug, Clone)]
pub struct CoDimOneDerivatives {
    pub r: DVector<f64>,
    pub grad_phi: DVector<f64>,
    pub r_jacobian: DMatrix<f64>,
    pub phi_hessian: DMatrix<f64>,
}

impl CoDimOneChart {
    pub fn new(
        phi: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        r: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            phi: Arc::new(phi),
            r: Arc::new(r),
            grad_phi: None,
            r_jacobian: None,
            phi_hessian: None,
        }
    }

    pub fn with_derivatives(
        mut self,
        grad_phi: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        r_jacobian: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
        phi_hessian: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.grad_phi = Some(Arc::new(grad_phi));
        self.r_jacobian = Some(Arc::new(r_jacobian));
        self.phi_hessian = Some(Arc::new(phi_hessian));
        self
    }

    pub fn without_derivatives(&self) -> Self {
        Self {
            phi: self.phi.clone(),
            r: self.r.clone(),
            grad_phi: None,
            r_jacobian: None,
            phi_hessian: None,
        }
    }

    pub fn phi(&self, x: &DVector<f64>) -> f64 {
        (self.phi)(x)
    }

    pub fn r(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.r)(x)
    }

    pub fn derivatives(&self, x: &DVector<f64>, step: FdStep) -> Result<CoDimOneDerivatives> {
        let r = self.r(x);
        let grad_phi = match &self.grad_phi {
            Some(g) => g(x),
            None => diff::gradient(|y| Ok(self.phi(y)), x, step.first_order(x))?,
        };
        let r_jacobian = match &self.r_jacobian {
            Some(j) => j(x),
            None => diff::jacobian(|y| Ok(self.r(y)), x, step.first_order(x))?,
        };
        let phi_hessian = match &self.phi_hessian {
            Some(h) => h(x),
            None => diff::scalar_hessian(|y| Ok(self.phi(y)), x, step.second_order(x))?,
        };
        let all_finite = r.iter().chain(grad_phi.iter()).chain(r_jacobian.iter()).chain(phi_hessian.iter()).all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::eval("co-dimension-one factorization", x.as_slice()));
        }
        Ok(CoDimOneDerivatives {
            r,
            grad_phi,
            r_jacobian,
            phi_hessian,
        })
    }

    /// `‖f(x) − φ(x)·r(x)‖_∞`.
    pub fn factorization_residual(&self, system: &SdeSystem, x: &DVector<f64>) -> Result<f64> {
        let f = system.outer(x)?;
        Ok((f - self.r(x) * self.phi(x)).amax())
    }
}

/// What is known about Γ.
#[derive(Debug, Clone)]
pub enum ManifoldSpec {
    Parametrized1D(CurveChart),
    CoDimOne(CoDimOneChart),
    General { slow_dim: usize },
    Unknown,
}

impl ManifoldSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ManifoldSpec::Parametrized1D(_) => "parametrized_1d",
            ManifoldSpec::CoDimOne(_) => "codim_one",
            ManifoldSpec::General { .. } => "general",
            ManifoldSpec::Unknown => "unknown",
        }
    }

    /// Slow dimension implied by the description, if any.
    pub fn slow_dim(&self, ambient: usize) -> Option<usize> {
        match self {
            ManifoldSpec::Parametrized1D(_) => Some(1),
            ManifoldSpec::CoDimOne(_) => ambient.checked_sub(1),
            ManifoldSpec::General { slow_dim } => Some(*slow_dim),
            ManifoldSpec::Unknown => None,
        }
    }
}
