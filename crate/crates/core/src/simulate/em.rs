use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::rng::replicate_rng;
use super::TrajectoryEnsemble;
use crate::error::{Error, Result};
use crate::model::SdeSystem;

/// A fixed-step time grid, recorded every `record_every` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepGrid {
    pub dt: f64,
    pub n_steps: usize,
    pub record_every: usize,
}

impl StepGrid {
    /// `t_end/dt` steps (rounded), recording `n_out` evenly spaced times after `t = 0`.
    pub fn new(dt: f64, t_end: f64, n_out: usize) -> Result<Self> {
        if !(dt > 0.0 && t_end >= 0.0 && dt.is_finite() && t_end.is_finite()) {
            return Err(Error::Config(format!("need dt > 0 and t_end >= 0, got dt={dt}, t_end={t_end}")));
        }
        let n_steps = (t_end / dt).round() as usize;
        let n_out = n_out.clamp(1, n_steps.max(1));
        let record_every = (n_steps / n_out).max(1);
        Ok(Self {
            dt,
            n_steps: record_every * (n_steps / record_every),
            record_every,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps / self.record_every)
            .map(|k| (k * self.record_every) as f64 * self.dt)
            .collect()
    }

    pub fn n_records(&self) -> usize {
        self.n_steps / self.record_every + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    pub grid: StepGrid,
    pub n_rep: usize,
    pub seed: u64,
}

/// Itô–Euler steps `x ← x + (f + εh)dt + √(μ dt)·Gξ`.
pub fn simulate_full(system: &SdeSystem, x0: &DVector<f64>, opts: &EnsembleOptions) -> Result<TrajectoryEnsemble> {
    let d = system.dim();
    if x0.len() != d {
        return Err(Error::Shape(format!("x0 has length {}, system dimension is {d}", x0.len())));
    }
    let grid = opts.grid;
    let paths = (0..opts.n_rep)
        .into_par_iter()
        .map(|rep| full_replicate(system, x0.as_slice(), &grid, opts.seed, rep))
        .collect::<Result<Vec<_>>>()?;
    TrajectoryEnsemble::from_paths(grid.times(), d, paths, opts.seed, system.label())
}

fn full_replicate(system: &SdeSystem, x0: &[f64], grid: &StepGrid, seed: u64, rep: usize) -> Result<Vec<f64>> {
    let d = system.dim();
    let s = system.noise_dim();
    let mut rng = replicate_rng(seed, rep);
    let mut x = x0.to_vec();
    let mut f = vec![0.0; d];
    let mut h = vec![0.0; d];
    let mut g = DMatrix::zeros(d, s);
    let mut xi = vec![0.0; s];
    let eps_dt = system.epsilon() * grid.dt;
    let noise_scale = (system.mu() * grid.dt).sqrt();
    let with_noise = noise_scale > 0.0;
    let mut out = Vec::with_capacity(grid.n_records() * d);
    out.extend_from_slice(&x);
    for step in 1..=grid.n_steps {
        // a non-finite drift means the path has escaped, which is reported as a blow-up
        let blow_up = |_| Error::BlowUp { replicate: rep, step };
        system.outer_into(&x, &mut f).map_err(blow_up)?;
        if eps_dt != 0.0 {
            system.inner_into(&x, &mut h).map_err(blow_up)?;
        }
        if with_noise {
            system.noise_into(&x, &mut g)?;
            for v in xi.iter_mut() {
                *v = rng.sample::<f64, _>(StandardNormal);
            }
        }
        for i in 0..d {
            let mut dx = f[i] * grid.dt;
            if eps_dt != 0.0 {
                dx += h[i] * eps_dt;
            }
            if with_noise {
                dx += noise_scale * (0..s).map(|c| g[(i, c)] * xi[c]).sum::<f64>();
            }
            x[i] += dx;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { replicate: rep, step });
        }
        if step % grid.record_every == 0 {
            out.extend_from_slice(&x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_records_endpoints() {
        let g = StepGrid::new(0.1, 10.0, 20).unwrap();
        let t = g.times();
        assert_eq!(t.len(), 21);
        assert!((t[20] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn blow_up_is_reported() {
        let s = SdeSystem::builder(1, 1).outer(|x, o| o[0] = x[0] * x[0]).build().unwrap();
        let opts = EnsembleOptions {
            grid: StepGrid::new(0.5, 100.0, 10).unwrap(),
            n_rep: 1,
            seed: 0,
        };
        let err = simulate_full(&s, &DVector::from_element(1, 1.0), &opts).unwrap_err();
        assert!(matches!(err, Error::BlowUp { replicate: 0, .. }));
    }
}
