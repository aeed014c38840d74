//! Competitive Lotka–Volterra dynamics with weak selection, whose slow manifold is
//! the simplex `Σx = 1 − d/b` and whose reduction is a Wright–Fisher diffusion.
//!
//! Events per species `i` at carrying capacity `K`, with selection parameters scaled by `1/K`:
//! birth at rate `b(1+ε_i/K)·x_i(1−Σx)`, death at `d(1+η_i/K)·x_i`, and displacement of
//! `j` by offspring of `i` at `b(1+ε_i/K)(c+a_ij/K)·x_i x_j`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{require, Params};
use crate::error::{Error, Result};
use crate::jump::JumpModel;
use crate::manifold::{CoDimOneChart, ManifoldSpec};
use crate::model::SdeSystem;
use crate::reduction::{assemble_reduced, noise_drift, CurvatureTensor, Method, ReducedSystem};

/// Selection parameters: fecundity `ε_i`, mortality `η_i`, competition `a_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub fecundity: Vec<f64>,
    pub mortality: Vec<f64>,
    pub competition: DMatrix<f64>,
}

impl Selection {
    pub fn neutral(n: usize) -> Self {
        Self {
            fecundity: vec![0.0; n],
            mortality: vec![0.0; n],
            competition: DMatrix::zeros(n, n),
        }
    }

    pub fn is_neutral(&self) -> bool {
        self.fecundity.iter().chain(&self.mortality).chain(self.competition.iter()).all(|&v| v == 0.0)
    }
}

#[derive(Debug, Clone)]
struct Rates {
    b: f64,
    d: f64,
    c: f64,
    k: f64,
    sel: Selection,
}

impl Rates {
    fn birth(&self, i: usize) -> f64 {
        self.b * (1.0 + self.sel.fecundity[i] / self.k)
    }

    fn death(&self, i: usize) -> f64 {
        self.d * (1.0 + self.sel.mortality[i] / self.k)
    }

    fn displacement(&self, i: usize, j: usize) -> f64 {
        self.birth(i) * (self.c + self.sel.competition[(i, j)] / self.k)
    }

    /// Inner drift `h_i = x_i(d(ε_i−η_i) + cΣ_j(ε_i−ε_j)x_j + bΣ_j(a_ij−a_ji)x_j)`.
    fn inner(&self, x: &[f64], out: &mut [f64]) {
        let s = &self.sel;
        for i in 0..x.len() {
            let mut acc = self.d * (s.fecundity[i] - s.mortality[i]);
            for j in 0..x.len() {
                acc += self.c * (s.fecundity[i] - s.fecundity[j]) * x[j]
                    + self.b * (s.competition[(i, j)] - s.competition[(j, i)]) * x[j];
            }
            out[i] = x[i] * acc;
        }
    }
}

#[derive(Debug, Clone)]
pub struct LotkaVolterra {
    rates: Arc<Rates>,
    species: usize,
    sde: SdeSystem,
    jump: JumpModel,
}

impl LotkaVolterra {
    pub const DEFAULT_RATE_FLOOR: f64 = 1.0;

    pub fn neutral(species: usize, b: f64, d: f64, c: f64, k: f64) -> Result<Self> {
        Self::new(species, b, d, c, k, Selection::neutral(species))
    }

    pub fn new(species: usize, b: f64, d: f64, c: f64, k: f64, selection: Selection) -> Result<Self> {
        require(species >= 1, || "need at least one species".into())?;
        require(b > d && d >= 0.0, || format!("need b > d >= 0, got b={b}, d={d}"))?;
        require(c > 0.0 && c <= 1.0, || format!("need 0 < c <= 1, got {c}"))?;
        require(k >= 1.0 && k.is_finite(), || format!("need K >= 1, got {k}"))?;
        require(
            selection.fecundity.len() == species
                && selection.mortality.len() == species
                && selection.competition.shape() == (species, species),
            || format!("selection parameters must have {species} entries per species"),
        )?;
        let rates = Arc::new(Rates {
            b,
            d,
            c,
            k,
            sel: selection,
        });
        let jump = build_jump(&rates, species)?;
        let n = species;
        let growth = b - d;
        let noise_model = jump.clone();
        let inner_rates = rates.clone();
        let floor = Self::DEFAULT_RATE_FLOOR;
        let sde = SdeSystem::builder(n, jump.transitions().len())
            .outer(move |x, o| {
                let total: f64 = x.iter().sum();
                for i in 0..x.len() {
                    o[i] = x[i] * (growth - b * total);
                }
            })
            .inner(move |x, o| inner_rates.inner(x, o))
            .noise(move |x, g| noise_model.noise_into(x, floor, g))
            .jacobian(move |x, j| {
                let total: f64 = x.iter().sum();
                for r in 0..x.len() {
                    for col in 0..x.len() {
                        j[(r, col)] = -b * x[r] + if r == col { growth - b * total } else { 0.0 };
                    }
                }
            })
            .hessians(move |x, hs| {
                let n = x.len();
                for (i, h) in hs.iter_mut().enumerate() {
                    *h = DMatrix::from_fn(n, n, |j, k| -b * ((i == j) as u8 as f64 + (i == k) as u8 as f64));
                }
            })
            .scales(1.0 / k, 1.0 / k)
            .label("lotka_volterra_wf")
            .build()?;
        Ok(Self {
            rates,
            species,
            sde,
            jump,
        })
    }

    pub fn from_params(p: &Params) -> Result<Self> {
        p.check_keys("lotka_volterra_wf", &["b", "d", "c", "K", "species", "eps*", "eta*", "a*"])?;
        let n = p.get_or("species", 2.0);
        require(n >= 1.0 && n.fract() == 0.0 && n <= 9.0, || format!("species must be an integer in 1..=9, got {n}"))?;
        let n = n as usize;
        let mut sel = Selection::neutral(n);
        for i in 0..n {
            sel.fecundity[i] = p.get_or(&format!("eps{}", i + 1), 0.0);
            sel.mortality[i] = p.get_or(&format!("eta{}", i + 1), 0.0);
            for j in 0..n {
                sel.competition[(i, j)] = p.get_or(&format!("a{}{}", i + 1, j + 1), 0.0);
            }
        }
        for (key, _) in p.iter() {
            let index_ok = |digits: &str, count: usize| {
                digits.len() == count && digits.chars().all(|c| ('1'..='9').contains(&c) && c.to_digit(10).unwrap() as usize <= n)
            };
            let ok = match key {
                k if k.starts_with("eps") => index_ok(&k[3..], 1),
                k if k.starts_with("eta") => index_ok(&k[3..], 1),
                k if k.starts_with('a') => index_ok(&k[1..], 2),
                _ => true,
            };
            require(ok, || format!("selection parameter '{key}' does not name a species among 1..={n}"))?;
        }
        Self::new(
            n,
            p.get_or("b", 2.0),
            p.get_or("d", 1.0),
            p.get_or("c", 1.0),
            p.get_or("K", 1000.0),
            sel,
        )
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn b(&self) -> f64 {
        self.rates.b
    }

    pub fn d(&self) -> f64 {
        self.rates.d
    }

    pub fn c(&self) -> f64 {
        self.rates.c
    }

    pub fn carrying_capacity(&self) -> f64 {
        self.rates.k
    }

    pub fn selection(&self) -> &Selection {
        &self.rates.sel
    }

    pub fn sde(&self) -> &SdeSystem {
        &self.sde
    }

    pub fn jump(&self) -> &JumpModel {
        &self.jump
    }

    /// Total density on Γ, `1 − d/b`.
    pub fn total_density(&self) -> f64 {
        1.0 - self.rates.d / self.rates.b
    }

    /// `N_e = (1−d/b)K / (2(c(b−d)+d))`.
    pub fn effective_population_size(&self) -> f64 {
        let r = &self.rates;
        self.total_density() * r.k / (2.0 * (r.c * (r.b - r.d) + r.d))
    }

    /// `φ = (b−d) − bΣx`, `r = x`.
    pub fn chart(&self) -> CoDimOneChart {
        let (b, d, n) = (self.rates.b, self.rates.d, self.species);
        CoDimOneChart::new(move |x| (b - d) - b * x.sum(), |x| x.clone()).with_derivatives(
            move |_| DVector::from_element(n, -b),
            move |_| DMatrix::identity(n, n),
            move |_| DMatrix::zeros(n, n),
        )
    }

    pub fn manifold(&self) -> ManifoldSpec {
        ManifoldSpec::CoDimOne(self.chart())
    }

    /// π(x) = (1−d/b)·x/Σx: the outer flow preserves ratios.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let total = x.sum();
        if !(total > 0.0) {
            return Err(Error::Domain(format!("total density {total} must be positive")));
        }
        Ok(x * (self.total_density() / total))
    }

    pub fn to_frequency(&self, x: &DVector<f64>) -> DVector<f64> {
        x / self.total_density()
    }

    pub fn from_frequency(&self, p: &DVector<f64>) -> DVector<f64> {
        p * self.total_density()
    }

    /// `∂p/∂x`, constant.
    pub fn frequency_jacobian(&self) -> DMatrix<f64> {
        DMatrix::identity(self.species, self.species) / self.total_density()
    }

    /// `s_i(p) = d(ε_i−η_i) + c S Σ_j(ε_i−ε_j)p_j + b S Σ_j(a_ij−a_ji)p_j` with `S = 1−d/b`.
    pub fn selection_coefficients(&self, p: &DVector<f64>) -> DVector<f64> {
        let r = &self.rates;
        let s = self.total_density();
        let sel = &r.sel;
        DVector::from_fn(self.species, |i, _| {
            r.d * (sel.fecundity[i] - sel.mortality[i])
                + (0..self.species)
                    .map(|j| {
                        r.c * s * (sel.fecundity[i] - sel.fecundity[j]) * p[j]
                            + r.b * s * (sel.competition[(i, j)] - sel.competition[(j, i)]) * p[j]
                    })
                    .sum::<f64>()
        })
    }

    /// `P_ij = δ_ij − x_i/S`.
    pub fn reference_p(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let s = self.total_density();
        DMatrix::from_fn(self.species, self.species, |i, j| (i == j) as u8 as f64 - x[i] / s)
    }

    /// `Q_ijk = −(δ_ij + δ_ik − 2x_i/S)/S`.
    pub fn reference_q(&self, x: &DVector<f64>) -> CurvatureTensor {
        let s = self.total_density();
        let n = self.species;
        let slices = (0..n)
            .map(|i| DMatrix::from_fn(n, n, |j, k| -((i == j) as u8 as f64 + (i == k) as u8 as f64 - 2.0 * x[i] / s) / s))
            .collect();
        CurvatureTensor::from_slices(slices).expect("square slices")
    }

    fn check_on_manifold(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.species {
            return Err(Error::Shape(format!("expected {} densities, got {}", self.species, x.len())));
        }
        let gap = (x.sum() - self.total_density()).abs();
        if gap > 1e-10 {
            return Err(Error::Domain(format!("Σx differs from 1−d/b by {gap:.3e}")));
        }
        Ok(())
    }

    pub fn reference_reduced(&self, x: &DVector<f64>) -> Result<ReducedSystem> {
        self.check_on_manifold(x)?;
        let p = self.reference_p(x);
        let q = self.reference_q(x);
        let g = noise_drift(&q, &self.sde.noise(x)?)?;
        assemble_reduced(&self.sde, x, p, q, g, Method::Reference)
    }

    /// Drift and covariance rate of the frequencies `p = x/S` under a reduced system at `x`.
    pub fn frequency_coefficients(&self, reduced: &ReducedSystem) -> (DVector<f64>, DMatrix<f64>) {
        let s = self.total_density();
        let noise = reduced.noise();
        (reduced.drift() / s, &noise * noise.transpose() / (s * s))
    }
}

fn build_jump(rates: &Arc<Rates>, n: usize) -> Result<JumpModel> {
    let unit = |i: usize, sign: i32| -> Vec<i32> { (0..n).map(|k| if k == i { sign } else { 0 }).collect() };
    let mut jump = JumpModel::new(n, rates.k)?;
    for i in 0..n {
        let r = rates.clone();
        jump = jump.with_transition(unit(i, 1), move |x| r.birth(i) * x[i] * (1.0 - x.iter().sum::<f64>()))?;
    }
    for i in 0..n {
        let r = rates.clone();
        jump = jump.with_transition(unit(i, -1), move |x| r.death(i) * x[i])?;
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut l = unit(i, 1);
            l[j] = -1;
            let r = rates.clone();
            jump = jump.with_transition(l, move |x| r.displacement(i, j) * x[i] * x[j])?;
        }
    }
    Ok(jump)
}
