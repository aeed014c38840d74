//! Birth–death process with `λ₁(x) = βx(1−x)` and `λ₋₁(x) = δx`.

use super::{require, Params};
use crate::error::Result;
use crate::jump::JumpModel;
use crate::model::SdeSystem;

#[derive(Debug, Clone)]
pub struct StochasticLogistic {
    beta: f64,
    delta: f64,
    jump: JumpModel,
    sde: SdeSystem,
}

impl StochasticLogistic {
    pub fn new(beta: f64, delta: f64, n: f64) -> Result<Self> {
        require(beta > 0.0 && delta >= 0.0, || format!("need beta > 0, delta >= 0, got ({beta}, {delta})"))?;
        let jump = JumpModel::new(1, n)?
            .with_transition(vec![1], move |x| beta * x[0] * (1.0 - x[0]))?
            .with_transition(vec![-1], move |x| delta * x[0])?;
        let sde = jump.to_sde(1.0 / n)?;
        Ok(Self { beta, delta, jump, sde })
    }

    pub fn from_params(p: &Params) -> Result<Self> {
        p.check_keys("stochastic_logistic", &["beta", "delta", "n"])?;
        Self::new(p.get_or("beta", 2.0), p.get_or("delta", 1.0), p.get_or("n", 500.0))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Deterministic equilibrium `1 − δ/β`.
    pub fn equilibrium(&self) -> f64 {
        (1.0 - self.delta / self.beta).max(0.0)
    }

    pub fn jump(&self) -> &JumpModel {
        &self.jump
    }

    pub fn sde(&self) -> &SdeSystem {
        &self.sde
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates() {
        let m = StochasticLogistic::new(2.0, 1.0, 500.0).unwrap();
        let t = m.jump().transitions();
        assert_eq!(t[0].rate(&[0.3]), 2.0 * 0.3 * 0.7);
        assert_eq!(t[1].rate(&[0.3]), 0.3);
        assert_eq!(m.equilibrium(), 0.5);
    }
}
