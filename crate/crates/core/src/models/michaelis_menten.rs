//! Enzyme kinetics `E + S ⇌ C → E + P` in substrate/complex coordinates.
//!
//! `x₁` is the substrate and `x₂` the complex, both scaled by their totals.
//! The slow manifold is the curve `x₂ = x₁/(x₁+α)`.

use nalgebra::{DMatrix, DVector};

use super::{require, Params};
use crate::error::{Error, Result};
use crate::manifold::{CoDimOneChart, CurveChart, ManifoldSpec};
use crate::model::{rate_sqrt, SdeSystem};
use crate::reduction::{assemble_reduced, noise_drift, CurvatureTensor, Method, ReducedSystem};

#[derive(Debug, Clone)]
pub struct MichaelisMenten {
    alpha: f64,
    beta: f64,
    rate_floor: f64,
    sde: SdeSystem,
}

impl MichaelisMenten {
    pub const DEFAULT_RATE_FLOOR: f64 = 1.0;

    pub fn new(alpha: f64, beta: f64, epsilon: f64, mu: f64) -> Result<Self> {
        Self::with_rate_floor(alpha, beta, epsilon, mu, Self::DEFAULT_RATE_FLOOR)
    }

    pub fn with_rate_floor(alpha: f64, beta: f64, epsilon: f64, mu: f64, rate_floor: f64) -> Result<Self> {
        require(alpha > 0.0 && alpha.is_finite(), || format!("alpha must be > 0, got {alpha}"))?;
        require(beta > 0.0 && beta.is_finite(), || format!("beta must be > 0, got {beta}"))?;
        require(rate_floor >= 0.0, || format!("rate_floor must be >= 0, got {rate_floor}"))?;
        let (a, b) = (alpha, beta);
        let sde = SdeSystem::builder(2, 3)
            .outer(move |x, o| {
                let bind = -x[0] + (x[0] + a) * x[1];
                o[0] = bind;
                o[1] = -b * bind;
            })
            .inner(|x, o| {
                o[0] = 0.0;
                o[1] = -x[1];
            })
            .noise(move |x, g| {
                let forward = rate_sqrt((1.0 - x[1]) * x[0], rate_floor);
                let backward = rate_sqrt(a * x[1], rate_floor);
                let catalysis = rate_sqrt(epsilon * b * x[1], rate_floor);
                g[(0, 0)] = -forward;
                g[(1, 0)] = b * forward;
                g[(0, 1)] = backward;
                g[(1, 1)] = -b * backward;
                g[(0, 2)] = 0.0;
                g[(1, 2)] = -catalysis;
            })
            .jacobian(move |x, j| {
                j[(0, 0)] = -1.0 + x[1];
                j[(0, 1)] = x[0] + a;
                j[(1, 0)] = -b * (-1.0 + x[1]);
                j[(1, 1)] = -b * (x[0] + a);
            })
            .hessians(move |_, hs| {
                hs[0] = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
                hs[1] = DMatrix::from_row_slice(2, 2, &[0.0, -b, -b, 0.0]);
            })
            .scales(epsilon, mu)
            .label("michaelis_menten")
            .build()?;
        Ok(Self {
            alpha,
            beta,
            rate_floor,
            sde,
        })
    }

    pub fn from_params(p: &Params) -> Result<Self> {
        p.check_keys("michaelis_menten", &["alpha", "beta", "epsilon", "mu", "rate_floor"])?;
        Self::with_rate_floor(
            p.get_or("alpha", 1.0),
            p.get_or("beta", 1.0),
            p.get_or("epsilon", 0.01),
            p.get_or("mu", 0.01),
            p.get_or("rate_floor", Self::DEFAULT_RATE_FLOOR),
        )
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rate_floor(&self) -> f64 {
        self.rate_floor
    }

    pub fn sde(&self) -> &SdeSystem {
        &self.sde
    }

    /// Same model at different `(ε, μ)`.
    pub fn with_scales(&self, epsilon: f64, mu: f64) -> Result<Self> {
        Self::with_rate_floor(self.alpha, self.beta, epsilon, mu, self.rate_floor)
    }

    pub fn gamma(&self, z: f64) -> DVector<f64> {
        DVector::from_vec(vec![z, z / (z + self.alpha)])
    }

    pub fn curve_chart(&self) -> CurveChart {
        let a = self.alpha;
        CurveChart::new(move |z| DVector::from_vec(vec![z, z / (z + a)]))
            .with_derivatives(
                move |z| DVector::from_vec(vec![1.0, a / ((z + a) * (z + a))]),
                move |z| DVector::from_vec(vec![0.0, -2.0 * a / (z + a).powi(3)]),
            )
            .with_parameter_of(|x| x[0])
    }

    /// `f = φ·r` with `φ = x₁ − x₂(x₁+α)` and `r = (−1, β)`.
    pub fn codim_chart(&self) -> CoDimOneChart {
        let (a, b) = (self.alpha, self.beta);
        CoDimOneChart::new(move |x| x[0] - x[1] * (x[0] + a), move |_| DVector::from_vec(vec![-1.0, b]))
            .with_derivatives(
                move |x| DVector::from_vec(vec![1.0 - x[1], -(x[0] + a)]),
                |_| DMatrix::zeros(2, 2),
                |_| DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]),
            )
    }

    pub fn curve_manifold(&self) -> ManifoldSpec {
        ManifoldSpec::Parametrized1D(self.curve_chart())
    }

    pub fn codim_manifold(&self) -> ManifoldSpec {
        ManifoldSpec::CoDimOne(self.codim_chart())
    }

    fn denom(&self, z: f64) -> f64 {
        self.alpha + self.beta * (z + self.alpha).powi(2)
    }

    /// π in closed form: `βx₁ + x₂` is conserved by the outer flow.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.gamma(self.project_scalar(x[0], x[1])?))
    }

    /// Substrate coordinate of `π(x₁, x₂)`.
    ///
    /// Small negative totals are allowed: the curve continues smoothly to `x₁ > −α`.
    pub fn project_scalar(&self, x1: f64, x2: f64) -> Result<f64> {
        let (a, b) = (self.alpha, self.beta);
        let c = b * x1 + x2;
        // root of βz² + (βα + 1 − c)z − cα = 0, written to avoid cancellation
        let lin = b * a + 1.0 - c;
        let disc2 = lin * lin + 4.0 * b * c * a;
        if !(disc2 >= 0.0) {
            return Err(Error::Domain(format!("no manifold point conserves βx₁+x₂ = {c}")));
        }
        let disc = disc2.sqrt();
        let z = if lin > 0.0 {
            2.0 * c * a / (lin + disc)
        } else {
            (disc - lin) / (2.0 * b)
        };
        if !(z > -a) {
            return Err(Error::Domain(format!("projection {z} lies beyond the pole at x₁ = −α")));
        }
        Ok(z)
    }

    /// Row of `P` for the substrate: `(z+α)²/(α+β(z+α)²)·(β, 1)`.
    pub fn reference_p_row(&self, z: f64) -> DVector<f64> {
        let s = (z + self.alpha).powi(2) / self.denom(z);
        DVector::from_vec(vec![self.beta * s, s])
    }

    /// `Q_{1jk} = 2α((z+α)/(α+β(z+α)²))³·[[β², β], [β, 1]]`.
    pub fn reference_q_mat(&self, z: f64) -> DMatrix<f64> {
        let b = self.beta;
        let k = 2.0 * self.alpha * ((z + self.alpha) / self.denom(z)).powi(3);
        DMatrix::from_row_slice(2, 2, &[b * b, b, b, 1.0]) * k
    }

    /// First component of `g` (per unit μ): `εαβz(z+α)²/(α+β(z+α)²)³`.
    pub fn reference_g1(&self, z: f64) -> f64 {
        let a = self.alpha;
        self.sde.epsilon() * a * self.beta * z * (z + a).powi(2) / self.denom(z).powi(3)
    }

    /// Drift of the reduced scalar equation for the substrate.
    pub fn reduced_drift(&self, z: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let (eps, mu) = (self.sde.epsilon(), self.sde.mu());
        let d = self.denom(z);
        -eps * z * (z + a) / d + eps * mu * a * b * z * (z + a).powi(2) / d.powi(3)
    }

    /// Coefficient of the single surviving noise channel in the reduced scalar equation.
    pub fn reduced_noise(&self, z: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let (eps, mu) = (self.sde.epsilon(), self.sde.mu());
        let arg = (eps * mu * b * z / (z + a)).max(0.0);
        -(z + a).powi(2) / self.denom(z) * arg.sqrt()
    }

    fn check_on_manifold(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != 2 {
            return Err(Error::Shape(format!("expected a point in R^2, got length {}", x.len())));
        }
        let residual = self.sde.outer(x)?.amax();
        if residual > 1e-8 * (1.0 + x.amax()) {
            return Err(Error::Domain(format!("({}, {}) is not on the slow manifold", x[0], x[1])));
        }
        Ok(x[0])
    }

    pub fn reference_reduced(&self, x: &DVector<f64>) -> Result<ReducedSystem> {
        let z = self.check_on_manifold(x)?;
        let a = self.alpha;
        let row = self.reference_p_row(z);
        let g1 = DVector::from_vec(vec![1.0, a / (z + a).powi(2)]);
        let g2 = DVector::from_vec(vec![0.0, -2.0 * a / (z + a).powi(3)]);
        let p = &g1 * row.transpose();
        let qm = self.reference_q_mat(z);
        let pp = &row * row.transpose();
        let q = CurvatureTensor::from_slices(vec![&qm * g1[0] + &pp * g2[0], &qm * g1[1] + &pp * g2[1]])?;
        let g = noise_drift(&q, &self.sde.noise(x)?)?;
        assemble_reduced(&self.sde, x, p, q, g, Method::Reference)
    }
}

/// Dimensional rate constants and totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmPhysical {
    pub k_f: f64,
    pub k_r: f64,
    pub k_cat: f64,
    pub e0: f64,
    pub s0: f64,
    pub volume: f64,
}

impl MmPhysical {
    /// `(α, β, ε, μ) = (k_r/(k_f S₀), S₀/E₀, k_cat/(k_f E₀), 1/(S₀ V))`.
    pub fn dimensionless(&self) -> (f64, f64, f64, f64) {
        (
            self.k_r / (self.k_f * self.s0),
            self.s0 / self.e0,
            self.k_cat / (self.k_f * self.e0),
            1.0 / (self.s0 * self.volume),
        )
    }

    pub fn model(&self) -> Result<MichaelisMenten> {
        let (a, b, e, m) = self.dimensionless();
        MichaelisMenten::new(a, b, e, m)
    }

    /// Drift and noise of the product concentration, by Itô's formula applied to the
    /// reduced substrate equation and converted to physical time `t/(k_f E₀)`.
    pub fn production_law_via_reduction(&self, substrate: f64) -> Result<(f64, f64)> {
        let m = self.model()?;
        let (a, e0) = (m.alpha(), self.e0);
        let z = substrate / self.s0;
        // product = S₀ − S₀z − E₀ z/(z+α)
        let dp = -self.s0 - e0 * a / (z + a).powi(2);
        let d2p = 2.0 * e0 * a / (z + a).powi(3);
        let (drift, noise) = (m.reduced_drift(z), m.reduced_noise(z));
        let rate = self.k_f * self.e0;
        Ok((
            (dp * drift + 0.5 * d2p * noise * noise) * rate,
            dp * noise * rate.sqrt(),
        ))
    }

    /// `(v*S/(k+S), √(v*S/(V(k+S))))` with `v* = k_cat E₀`, `k = k_r/k_f`.
    pub fn production_law_closed(&self, substrate: f64) -> (f64, f64) {
        let v = self.k_cat * self.e0;
        let k = self.k_r / self.k_f;
        let rate = v * substrate / (k + substrate);
        (rate, (rate / self.volume).sqrt())
    }
}
