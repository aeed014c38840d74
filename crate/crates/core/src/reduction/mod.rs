//! Projection `P`, curvature `Q` and noise-induced drift `g` at points of Γ,
//! and the reduced SDE `dz = (εPh + μg) dt + √μ PG dW` they assemble into.

mod codim1;
mod general;
mod one_d;
mod tensor;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

pub use codim1::{codim1_from_derivatives, reduce_codim1};
pub use general::{
    a3_residual, lyapunov_residual, lyapunov_solve, lyapunov_solve_matrix, project_general, projection_from_bases,
    q_general,
};
pub use one_d::{build_local_frame_1d, lift_1d, q_1d, LocalFrame1D};
pub use tensor::CurvatureTensor;

use crate::error::{Error, Result};
use crate::flow::{pi_jet_fd, PiOptions};
use crate::manifold::ManifoldSpec;
use crate::model::{eval_jet, JetOptions, SdeSystem};

/// Which procedure produced a reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    General,
    OneD,
    CoDimOne,
    /// Finite differences of the numerically integrated flow map.
    Oracle,
    /// Closed-form reference values of a built-in model.
    Reference,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::General => "general",
            Method::OneD => "one_d",
            Method::CoDimOne => "codim1",
            Method::Oracle => "oracle",
            Method::Reference => "reference",
        }
    }

    /// Routes that can run for a given manifold description, preferred first.
    pub fn available_for(spec: &ManifoldSpec) -> &'static [Method] {
        match spec {
            ManifoldSpec::Parametrized1D(_) => &[Method::OneD, Method::General, Method::Oracle],
            ManifoldSpec::CoDimOne(_) => &[Method::CoDimOne, Method::General, Method::Oracle],
            ManifoldSpec::General { .. } => &[Method::General, Method::Oracle],
            ManifoldSpec::Unknown => &[Method::Oracle],
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Method::General),
            "one_d" | "1d" => Ok(Method::OneD),
            "codim1" => Ok(Method::CoDimOne),
            "oracle" => Ok(Method::Oracle),
            "reference" => Ok(Method::Reference),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected general, one_d, codim1, oracle or reference)"
            ))),
        }
    }
}

/// Everything the reduced SDE needs at one point of Γ.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub base_point: DVector<f64>,
    pub p: DMatrix<f64>,
    pub q: CurvatureTensor,
    /// Noise-induced drift per unit μ.
    pub g: DVector<f64>,
    /// `P·h`.
    pub projected_inner: DVector<f64>,
    /// `P·G`.
    pub projected_noise: DMatrix<f64>,
    pub method: Method,
    pub epsilon: f64,
    pub mu: f64,
}

impl ReducedSystem {
    /// `εPh + μg`.
    pub fn drift(&self) -> DVector<f64> {
        &self.projected_inner * self.epsilon + &self.g * self.mu
    }

    /// `√μ·PG`.
    pub fn noise(&self) -> DMatrix<f64> {
        &self.projected_noise * self.mu.sqrt()
    }

    /// `‖P² − P‖_∞`.
    pub fn idempotence_defect(&self) -> f64 {
        (&self.p * &self.p - &self.p).amax()
    }

    /// Singular values of `P`, largest first.
    pub fn projector_singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.p.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// `g_i = ½ Σ_{s,j,k} G_js G_ks Q_ijk`.
pub fn noise_drift(q: &CurvatureTensor, g: &DMatrix<f64>) -> Result<DVector<f64>> {
    if g.nrows() != q.dim() {
        return Err(Error::Shape(format!(
            "G has {} rows, Q has dimension {}",
            g.nrows(),
            q.dim()
        )));
    }
    Ok(q.half_contract(&(g * g.transpose())))
}

pub fn assemble_reduced(
    system: &SdeSystem,
    z: &DVector<f64>,
    p: DMatrix<f64>,
    q: CurvatureTensor,
    g: DVector<f64>,
    method: Method,
) -> Result<ReducedSystem> {
    let projected_inner = &p * system.inner(z)?;
    let projected_noise = &p * system.noise(z)?;
    Ok(ReducedSystem {
        base_point: z.clone(),
        p,
        q,
        g,
        projected_inner,
        projected_noise,
        method,
        epsilon: system.epsilon(),
        mu: system.mu(),
    })
}

/// A point of Γ, either in ambient coordinates or as a chart parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldPoint {
    State(DVector<f64>),
    Param(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionOptions {
    pub jet: JetOptions,
    pub pi: PiOptions,
    /// Step for the flow-map oracle.
    pub oracle_step: f64,
    /// Base points need `‖f‖_∞ ≤ manifold_tol·(1 + ‖z‖_∞)`.
    pub manifold_tol: f64,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self {
            jet: JetOptions::default(),
            pi: PiOptions::default(),
            oracle_step: 1e-3,
            manifold_tol: 1e-8,
        }
    }
}

fn route_error(spec: &ManifoldSpec, method: Method) -> Error {
    let options: Vec<&str> = Method::available_for(spec).iter().map(|m| m.as_str()).collect();
    Error::Config(format!(
        "method '{method}' is not available for a {} manifold; choose one of: {}",
        spec.kind(),
        options.join(", ")
    ))
}

/// Reduces at one point, choosing the route from the manifold description unless `method` is given.
pub fn reduce_at(
    system: &SdeSystem,
    spec: &ManifoldSpec,
    at: &ManifoldPoint,
    method: Option<Method>,
    opts: &ReductionOptions,
) -> Result<ReducedSystem> {
    let method = method.unwrap_or(Method::available_for(spec)[0]);
    if !Method::available_for(spec).contains(&method) {
        return Err(route_error(spec, method));
    }
    let (z, s) = match (at, spec) {
        (ManifoldPoint::State(z), ManifoldSpec::Parametrized1D(chart)) => (z.clone(), chart.parameter_of(z)),
        (ManifoldPoint::State(z), _) => (z.clone(), None),
        (ManifoldPoint::Param(s), ManifoldSpec::Parametrized1D(chart)) => (chart.point(*s), Some(*s)),
        (ManifoldPoint::Param(_), _) => {
            return Err(Error::Config(format!(
                "a chart parameter needs a parametrized 1-D manifold, got {}",
                spec.kind()
            )))
        }
    };
    if z.len() != system.dim() {
        return Err(Error::Shape(format!("point has length {}, system dimension is {}", z.len(), system.dim())));
    }
    let residual = system.outer(&z)?.amax();
    if residual > opts.manifold_tol * (1.0 + z.amax()) {
        return Err(Error::Domain(format!("‖f(z)‖ = {residual:.3e}, the point is not on the slow manifold")));
    }

    let mut jet_opts = opts.jet;
    if jet_opts.split.slow_dim.is_none() {
        jet_opts.split.slow_dim = spec.slow_dim(system.dim());
    }

    let (p, q) = match (method, spec) {
        (Method::General, _) => {
            let jet = eval_jet(system, &z, &jet_opts)?;
            let p = project_general(&jet);
            let q = q_general(&jet, &p)?;
            (p, q)
        }
        (Method::OneD, ManifoldSpec::Parametrized1D(chart)) => {
            let s = s.ok_or_else(|| {
                Error::Config("the 1-D route needs a chart parameter or an inverse chart".into())
            })?;
            let jet = eval_jet(system, &z, &jet_opts)?;
            let frame = build_local_frame_1d(system, &jet, chart, s, &jet_opts)?;
            let (row, mat) = q_1d(&frame)?;
            lift_1d(&frame, &row, &mat)?
        }
        (Method::CoDimOne, ManifoldSpec::CoDimOne(chart)) => {
            let (p, q, _) = reduce_codim1(chart, &z, jet_opts.fd_step)?;
            (p, q)
        }
        (Method::Oracle, _) => {
            let (p, slices) = pi_jet_fd(system, &z, opts.oracle_step, &opts.pi)?;
            (p, CurvatureTensor::from_slices(slices)?)
        }
        (m, _) => return Err(route_error(spec, m)),
    };
    let g = noise_drift(&q, &system.noise(&z)?)?;
    assemble_reduced(system, &z, p, q, g, method)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_drift_of_zero_curvature() {
        let g = noise_drift(&CurvatureTensor::zeros(3), &DMatrix::identity(3, 2)).unwrap();
        assert_eq!(g.amax(), 0.0);
        assert!(noise_drift(&CurvatureTensor::zeros(3), &DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::General, Method::OneD, Method::CoDimOne, Method::Oracle, Method::Reference] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("bogus".parse::<Method>().unwrap_err().is_config());
    }

    #[test]
    fn unavailable_route_lists_options() {
        let s = SdeSystem::builder(1, 1).outer(|x, o| o[0] = -x[0]).build().unwrap();
        let err = reduce_at(
            &s,
            &ManifoldSpec::Unknown,
            &ManifoldPoint::State(DVector::zeros(1)),
            Some(Method::CoDimOne),
            &ReductionOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("oracle"));
    }

    #[test]
    fn zero_scales_give_zero_reduced_sde() {
        let s = SdeSystem::builder(2, 1)
            .outer(|x, o| {
                o[0] = 0.0;
                o[1] = -x[1];
            })
            .inner(|_, o| o.fill(1.0))
            .noise(|_, g| g.fill(1.0))
            .build()
            .unwrap();
        let r = reduce_at(
            &s,
            &ManifoldSpec::General { slow_dim: 1 },
            &ManifoldPoint::State(DVector::from_vec(vec![0.2, 0.0])),
            None,
            &ReductionOptions::default(),
        )
        .unwrap();
        assert_eq!(r.drift().amax(), 0.0);
        assert_eq!(r.noise().amax(), 0.0);
        assert!((r.projected_inner[0] - 1.0).abs() < 1e-12);
    }
}
