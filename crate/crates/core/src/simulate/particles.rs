use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::em::StepGrid;
use super::rng::replicate_rng;
use crate::error::{Error, Result};
use crate::models::CompetitionDiffusion;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleOptions {
    pub grid: StepGrid,
    pub n_rep: usize,
    pub seed: u64,
    pub births: bool,
    pub deaths: bool,
}

/// Mean-square spread `Δ(t) = μ² Σ_{n,m} (X_n − X_m)²` averaged over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadSeries {
    pub times: Vec<f64>,
    /// Mean of Δ over replicates still alive at each time.
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    /// Replicates contributing at each time.
    pub alive: Vec<usize>,
    /// Per replicate: whether the population died out.
    pub extinct: Vec<bool>,
}

impl SpreadSeries {
    /// Largest `|mean − prediction|/prediction` over recorded times `t ≥ t_min`.
    pub fn max_relative_deviation(&self, prediction: impl Fn(f64) -> f64, t_min: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.mean)
            .filter(|(t, _)| **t >= t_min)
            .map(|(&t, &m)| ((m - prediction(t)) / prediction(t)).abs())
            .fold(0.0, f64::max)
    }
}

/// `μ²·2N·Σ(X − X̄)²`, which equals the pairwise double sum.
pub fn spread(positions: &[f64], mu: f64) -> f64 {
    let n = positions.len();
    if n == 0 {
        return 0.0;
    }
    let mean = positions.iter().sum::<f64>() / n as f64;
    let ss: f64 = positions.iter().map(|x| (x - mean) * (x - mean)).sum();
    mu * mu * 2.0 * n as f64 * ss
}

/// Fixed-step splitting: Gaussian displacement of variance `2ε·dt`, then each particle
/// independently branches with probability `dt` and dies with probability `μ(N−1)·dt`.
pub fn simulate_particles_competition(model: &CompetitionDiffusion, opts: &ParticleOptions) -> Result<SpreadSeries> {
    let grid = opts.grid;
    if grid.dt > 1.0 {
        return Err(Error::Config(format!("dt = {} is too large for per-step event probabilities", grid.dt)));
    }
    let runs = (0..opts.n_rep)
        .into_par_iter()
        .map(|rep| particle_replicate(model, opts, rep))
        .collect::<Vec<_>>();
    let times = grid.times();
    let nt = times.len();
    let mut mean = vec![0.0; nt];
    let mut se = vec![0.0; nt];
    let mut alive = vec![0; nt];
    for t in 0..nt {
        let vals: Vec<f64> = runs.iter().filter_map(|(series, _)| series.get(t).copied()).collect();
        let n = vals.len();
        alive[t] = n;
        if n == 0 {
            continue;
        }
        let m = vals.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n as f64 - 1.0)
        } else {
            0.0
        };
        mean[t] = m;
        se[t] = (var / n as f64).sqrt();
    }
    Ok(SpreadSeries {
        times,
        mean,
        se,
        alive,
        extinct: runs.into_iter().map(|(_, e)| e).collect(),
    })
}

/// Recorded Δ values (truncated at extinction) and the extinction flag.
fn particle_replicate(model: &CompetitionDiffusion, opts: &ParticleOptions, rep: usize) -> (Vec<f64>, bool) {
    let grid = opts.grid;
    let mut rng = replicate_rng(opts.seed, rep);
    let mut pos = vec![0.0; model.n_init];
    let mut next = Vec::with_capacity(2 * model.n_init);
    let sd = (2.0 * model.epsilon * grid.dt).sqrt();
    let mut series = Vec::with_capacity(grid.n_records());
    series.push(spread(&pos, model.mu));
    for step in 1..=grid.n_steps {
        let n = pos.len();
        let p_death = if opts.deaths {
            (model.mu * (n as f64 - 1.0) * grid.dt).min(1.0)
        } else {
            0.0
        };
        let p_birth = if opts.births { grid.dt.min(1.0) } else { 0.0 };
        next.clear();
        for &x in &pos {
            let y = x + sd * rng.sample::<f64, _>(StandardNormal);
            let dies = p_death > 0.0 && rng.gen::<f64>() < p_death;
            let branches = p_birth > 0.0 && rng.gen::<f64>() < p_birth;
            if !dies {
                next.push(y);
            }
            if branches {
                next.push(y);
            }
        }
        std::mem::swap(&mut pos, &mut next);
        if pos.is_empty() {
            return (series, true);
        }
        if step % grid.record_every == 0 {
            series.push(spread(&pos, model.mu));
        }
    }
    (series, false)
}
