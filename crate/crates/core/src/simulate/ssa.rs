use nalgebra::DVector;
use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use super::rng::replicate_rng;
use super::TrajectoryEnsemble;
use crate::error::{Error, Result};
use crate::jump::JumpModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsaOptions {
    pub t_end: f64,
    /// Number of recorded intervals; states are recorded at `k·t_end/n_out`.
    pub n_out: usize,
    pub n_rep: usize,
    pub seed: u64,
}

/// Gillespie's direct method on counts `N = n·x`, recorded as densities.
///
/// Negative rates (outside the lattice domain) count as zero. A state with zero
/// total rate is absorbing and the path stays there.
pub fn simulate_ssa(jump: &JumpModel, x0: &DVector<f64>, opts: &SsaOptions) -> Result<TrajectoryEnsemble> {
    let d = jump.dim();
    if x0.len() != d {
        return Err(Error::Shape(format!("x0 has length {}, model dimension is {d}", x0.len())));
    }
    if !(opts.t_end > 0.0) || opts.n_out == 0 {
        return Err(Error::Config("need t_end > 0 and n_out >= 1".into()));
    }
    let n = jump.scale();
    let counts0: Vec<i64> = x0.iter().map(|v| (v * n).round() as i64).collect();
    let times: Vec<f64> = (0..=opts.n_out).map(|k| opts.t_end * k as f64 / opts.n_out as f64).collect();
    let paths = (0..opts.n_rep)
        .into_par_iter()
        .map(|rep| ssa_replicate(jump, &counts0, &times, opts.seed, rep))
        .collect::<Result<Vec<_>>>()?;
    TrajectoryEnsemble::from_paths(times, d, paths, opts.seed, "ssa")
}

fn ssa_replicate(jump: &JumpModel, counts0: &[i64], times: &[f64], seed: u64, rep: usize) -> Result<Vec<f64>> {
    let n = jump.scale();
    let d = counts0.len();
    let transitions = jump.transitions();
    let mut rng = replicate_rng(seed, rep);
    let mut counts = counts0.to_vec();
    let mut x: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let mut rates = vec![0.0; transitions.len()];
    let mut out = Vec::with_capacity(times.len() * d);
    let mut next = 0;
    let mut t = 0.0;
    while next < times.len() {
        let mut total = 0.0;
        for (r, tr) in rates.iter_mut().zip(transitions) {
            *r = n * tr.rate(&x).max(0.0);
            total += *r;
        }
        if !total.is_finite() {
            return Err(Error::eval("jump rates", &x));
        }
        let t_next = if total > 0.0 {
            t + rng.sample::<f64, _>(Exp1) / total
        } else {
            f64::INFINITY
        };
        while next < times.len() && times[next] < t_next {
            out.extend_from_slice(&x);
            next += 1;
        }
        if next == times.len() {
            break;
        }
        t = t_next;
        let mut u = rng.gen::<f64>() * total;
        let mut chosen = rates.len() - 1;
        for (l, &r) in rates.iter().enumerate() {
            if u < r {
                chosen = l;
                break;
            }
            u -= r;
        }
        for (i, &l) in transitions[chosen].jump.iter().enumerate() {
            counts[i] += l as i64;
            x[i] = counts[i] as f64 / n;
        }
    }
    Ok(out)
}
