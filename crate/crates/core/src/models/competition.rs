//! Branching Brownian particles with pairwise competition.

use super::{require, Params};
use crate::error::Result;

/// Each particle diffuses with variance `2ε` per unit time, branches at rate 1 and
/// dies at rate `μ(N−1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompetitionDiffusion {
    pub epsilon: f64,
    pub mu: f64,
    pub n_init: usize,
}

impl CompetitionDiffusion {
    pub fn new(epsilon: f64, mu: f64, n_init: usize) -> Result<Self> {
        require(epsilon >= 0.0, || format!("epsilon must be >= 0, got {epsilon}"))?;
        require(mu > 0.0, || format!("mu must be > 0, got {mu}"))?;
        require(n_init >= 1, || "n_init must be >= 1".into())?;
        Ok(Self { epsilon, mu, n_init })
    }

    pub fn from_params(p: &Params) -> Result<Self> {
        p.check_keys("competition_diffusion", &["epsilon", "mu", "n_init"])?;
        let n = p.get_or("n_init", 100.0);
        require(n >= 1.0 && n.fract() == 0.0, || format!("n_init must be a positive integer, got {n}"))?;
        Self::new(p.get_or("epsilon", 0.005), p.get_or("mu", 0.01), n as usize)
    }

    /// `E Δ(t) = (2ε/μ)(1 − e^{−2μt})`.
    pub fn predicted_spread(&self, t: f64) -> f64 {
        2.0 * self.epsilon / self.mu * (1.0 - (-2.0 * self.mu * t).exp())
    }

    pub fn limiting_spread(&self) -> f64 {
        2.0 * self.epsilon / self.mu
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prediction() {
        let m = CompetitionDiffusion::new(0.005, 0.01, 100).unwrap();
        assert_eq!(m.predicted_spread(0.0), 0.0);
        assert!((m.limiting_spread() - 1.0).abs() < 1e-15);
    }
}
