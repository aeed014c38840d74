//! Density-dependent jump processes: transitions `x → x + l/n` at rate `n·λ_l(x)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{rate_sqrt, SdeSystem};

pub type RateFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Transition {
    pub jump: Vec<i32>,
    rate: RateFn,
}

impl Transition {
    pub fn rate(&self, x: &[f64]) -> f64 {
        (self.rate)(x)
    }
}

impl fmt::Debug for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transition").field("jump", &self.jump).finish()
    }
}

#[derive(Debug, Clone)]
pub struct JumpModel {
    dim: usize,
    scale: f64,
    transitions: Vec<Transition>,
}

impl JumpModel {
    /// An empty model on `R^dim` with system size `scale`.
    pub fn new(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("jump model dimension must be positive".into()));
        }
        if !(scale >= 1.0 && scale.is_finite()) {
            return Err(Error::Config(format!("system size must be >= 1, got {scale}")));
        }
        Ok(Self {
            dim,
            scale,
            transitions: Vec::new(),
        })
    }

    pub fn with_transition(mut self, jump: Vec<i32>, rate: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if jump.len() != self.dim {
            return Err(Error::Shape(format!(
                "jump vector has length {}, model dimension is {}",
                jump.len(),
                self.dim
            )));
        }
        self.transitions.push(Transition {
            jump,
            rate: Arc::new(rate),
        });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// `f(x) = Σ_l l·λ_l(x)`.
    pub fn drift_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for t in &self.transitions {
            let r = t.rate(x);
            for (o, &l) in out.iter_mut().zip(&t.jump) {
                *o += l as f64 * r;
            }
        }
    }

    /// `G` with column `l·√λ_l(x)` per transition.
    pub fn noise_into(&self, x: &[f64], rate_floor: f64, out: &mut DMatrix<f64>) {
        for (c, t) in self.transitions.iter().enumerate() {
            let s = rate_sqrt(t.rate(x), rate_floor);
            for (i, &l) in t.jump.iter().enumerate() {
                out[(i, c)] = l as f64 * s;
            }
        }
    }

    /// The diffusion approximation `dx = f dt + √μ G dW` with `μ = 1/n`.
    pub fn to_sde(&self, rate_floor: f64) -> Result<SdeSystem> {
        let drift = self.clone();
        let noise = self.clone();
        SdeSystem::builder(self.dim, self.transitions.len().max(1))
            .outer(move |x, o| drift.drift_into(x, o))
            .noise(move |x, g| noise.noise_into(x, rate_floor, g))
            .scales(0.0, 1.0 / self.scale)
            .label("jump-diffusion")
            .build()
    }
}
