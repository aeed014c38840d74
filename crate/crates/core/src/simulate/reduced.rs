use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::rng::replicate_rng;
use super::{EnsembleOptions, TrajectoryEnsemble};
use crate::error::{Error, Result};
use crate::flow::{pi_map, PiOptions};
use crate::manifold::ManifoldSpec;
use crate::model::SdeSystem;
use crate::models::{LotkaVolterra, MichaelisMenten};
use crate::reduction::{reduce_at, ManifoldPoint, Method, ReductionOptions};

pub type ProjectFn = Arc<dyn Fn(&DVector<f64>) -> Result<DVector<f64>> + Send + Sync>;

/// Maps states onto Γ.
#[derive(Clone)]
pub enum Projector {
    ClosedForm(ProjectFn),
    Flow { system: SdeSystem, opts: PiOptions },
}

impl fmt::Debug for Projector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projector::ClosedForm(_) => f.write_str("Projector::ClosedForm"),
            Projector::Flow { opts, .. } => f.debug_struct("Projector::Flow").field("opts", opts).finish(),
        }
    }
}

impl Projector {
    pub fn closed_form(f: impl Fn(&DVector<f64>) -> Result<DVector<f64>> + Send + Sync + 'static) -> Self {
        Projector::ClosedForm(Arc::new(f))
    }

    pub fn flow(system: &SdeSystem) -> Self {
        Projector::Flow {
            system: system.clone(),
            opts: PiOptions::default(),
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            Projector::ClosedForm(f) => f(x),
            Projector::Flow { system, opts } => pi_map(system, x, opts).map(|r| r.endpoint),
        }
    }
}

/// Coefficients of a reduced SDE `dz = a(z) dt + B(z) dW`.
pub trait ReducedDynamics: Sync {
    fn dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    fn coefficients(&self, z: &[f64], drift: &mut [f64], noise: &mut DMatrix<f64>) -> Result<()>;
    /// Replaces `z` by its projection onto Γ.
    fn reproject(&self, _z: &mut [f64]) -> Result<()> {
        Ok(())
    }
    /// Called after every step, e.g. to enforce state-space bounds.
    fn post_step(&self, _z: &mut [f64]) {}
    fn label(&self) -> &str {
        "reduced"
    }
}

/// The generic pipeline: `P`, `Q`, `g` re-evaluated at the projection of the current state.
#[derive(Debug, Clone)]
pub struct AssembledReduced {
    pub system: SdeSystem,
    pub manifold: ManifoldSpec,
    pub method: Option<Method>,
    pub opts: ReductionOptions,
    pub projector: Projector,
}

impl ReducedDynamics for AssembledReduced {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn noise_dim(&self) -> usize {
        self.system.noise_dim()
    }

    fn coefficients(&self, z: &[f64], drift: &mut [f64], noise: &mut DMatrix<f64>) -> Result<()> {
        let on = self.projector.apply(&DVector::from_column_slice(z))?;
        let r = reduce_at(&self.system, &self.manifold, &ManifoldPoint::State(on), self.method, &self.opts)?;
        drift.copy_from_slice(r.drift().as_slice());
        noise.copy_from(&r.noise());
        Ok(())
    }

    fn reproject(&self, z: &mut [f64]) -> Result<()> {
        let on = self.projector.apply(&DVector::from_column_slice(z))?;
        z.copy_from_slice(on.as_slice());
        Ok(())
    }

    fn label(&self) -> &str {
        self.system.label()
    }
}

/// The closed-form scalar equation for the substrate.
#[derive(Debug, Clone)]
pub struct MmReducedScalar(pub MichaelisMenten);

impl ReducedDynamics for MmReducedScalar {
    fn dim(&self) -> usize {
        1
    }

    fn noise_dim(&self) -> usize {
        1
    }

    fn coefficients(&self, z: &[f64], drift: &mut [f64], noise: &mut DMatrix<f64>) -> Result<()> {
        drift[0] = self.0.reduced_drift(z[0]);
        noise[(0, 0)] = self.0.reduced_noise(z[0]);
        Ok(())
    }

    fn label(&self) -> &str {
        "michaelis_menten_reduced"
    }
}

/// Closed-form reduced dynamics of the Lotka–Volterra model in frequency coordinates,
/// clamped to the simplex after every step.
#[derive(Debug, Clone)]
pub struct WrightFisherFrequencies(pub LotkaVolterra);

impl ReducedDynamics for WrightFisherFrequencies {
    fn dim(&self) -> usize {
        self.0.species()
    }

    fn noise_dim(&self) -> usize {
        self.0.sde().noise_dim()
    }

    fn coefficients(&self, p: &[f64], drift: &mut [f64], noise: &mut DMatrix<f64>) -> Result<()> {
        let x = self.0.from_frequency(&DVector::from_column_slice(p));
        let r = self.0.reference_reduced(&x)?;
        let s = self.0.total_density();
        drift.copy_from_slice((r.drift() / s).as_slice());
        noise.copy_from(&(r.noise() / s));
        Ok(())
    }

    fn post_step(&self, p: &mut [f64]) {
        clamp_to_simplex(p);
    }

    fn label(&self) -> &str {
        "wright_fisher"
    }
}

/// Clamps each entry to `[0, 1]` and renormalizes to unit sum.
pub fn clamp_to_simplex(p: &mut [f64]) {
    for v in p.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        for v in p.iter_mut() {
            *v /= total;
        }
    }
}

pub const DEFAULT_REPROJECT_EVERY: usize = 10;

/// Euler–Maruyama on the reduced SDE, reprojecting every `reproject_every` steps.
pub fn simulate_reduced(
    dynamics: &dyn ReducedDynamics,
    z0: &DVector<f64>,
    opts: &EnsembleOptions,
    reproject_every: usize,
) -> Result<TrajectoryEnsemble> {
    let d = dynamics.dim();
    if z0.len() != d {
        return Err(Error::Shape(format!("z0 has length {}, reduced dimension is {d}", z0.len())));
    }
    if reproject_every == 0 {
        return Err(Error::Config("reproject_every must be >= 1".into()));
    }
    let grid = opts.grid;
    let paths = (0..opts.n_rep)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(opts.seed, rep);
            let s = dynamics.noise_dim();
            let mut z = z0.as_slice().to_vec();
            let mut a = vec![0.0; d];
            let mut b = DMatrix::zeros(d, s);
            let mut xi = vec![0.0; s];
            let sqrt_dt = grid.dt.sqrt();
            let mut out = Vec::with_capacity(grid.n_records() * d);
            out.extend_from_slice(&z);
            for step in 1..=grid.n_steps {
                dynamics.coefficients(&z, &mut a, &mut b)?;
                for v in xi.iter_mut() {
                    *v = rng.sample::<f64, _>(StandardNormal);
                }
                for i in 0..d {
                    z[i] += a[i] * grid.dt + sqrt_dt * (0..s).map(|c| b[(i, c)] * xi[c]).sum::<f64>();
                }
                dynamics.post_step(&mut z);
                if step % reproject_every == 0 {
                    dynamics.reproject(&mut z)?;
                }
                if z.iter().any(|v| !v.is_finite()) {
                    return Err(Error::BlowUp { replicate: rep, step });
                }
                if step % grid.record_every == 0 {
                    out.extend_from_slice(&z);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    TrajectoryEnsemble::from_paths(grid.times(), d, paths, opts.seed, dynamics.label())
}
