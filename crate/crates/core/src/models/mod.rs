//! Built-in models with closed-form reference answers.

mod competition;
mod logistic;
mod lotka_volterra;
mod michaelis_menten;

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::DVector;

pub use competition::CompetitionDiffusion;
pub use logistic::StochasticLogistic;
pub use lotka_volterra::{LotkaVolterra, Selection};
pub use michaelis_menten::{MichaelisMenten, MmPhysical};

use crate::error::{Error, Result};
use crate::jump::JumpModel;
use crate::manifold::ManifoldSpec;
use crate::model::SdeSystem;
use crate::reduction::ReducedSystem;

/// Named scalar parameters, as read from a config `params` table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(BTreeMap<String, f64>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn insert(&mut self, key: impl Into<String>, value: f64) {
        self.0.insert(key.into(), value);
    }

    pub fn get_or(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).copied().unwrap_or(default)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Rejects keys not matched by `known` (exact names, or prefixes ending in `*`).
    pub(crate) fn check_keys(&self, model: &str, known: &[&str]) -> Result<()> {
        for key in self.0.keys() {
            let ok = known.iter().any(|k| match k.strip_suffix('*') {
                Some(prefix) => key.starts_with(prefix) && key[prefix.len()..].chars().all(|c| c.is_ascii_digit()),
                None => key == k,
            });
            if !ok {
                return Err(Error::Config(format!(
                    "unknown parameter '{key}' for {model}; known: {}",
                    known.join(", ")
                )));
            }
        }
        Ok(())
    }
}

impl FromIterator<(String, f64)> for Params {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelName {
    MichaelisMenten,
    LotkaVolterraWf,
    StochasticLogistic,
    CompetitionDiffusion,
}

impl ModelName {
    pub const ALL: [ModelName; 4] = [
        ModelName::MichaelisMenten,
        ModelName::LotkaVolterraWf,
        ModelName::StochasticLogistic,
        ModelName::CompetitionDiffusion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::MichaelisMenten => "michaelis_menten",
            ModelName::LotkaVolterraWf => "lotka_volterra_wf",
            ModelName::StochasticLogistic => "stochastic_logistic",
            ModelName::CompetitionDiffusion => "competition_diffusion",
        }
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelName::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = ModelName::ALL.iter().map(|m| m.as_str()).collect();
            Error::Config(format!("unknown builtin '{s}'; available: {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone)]
pub enum BuiltinModel {
    MichaelisMenten(MichaelisMenten),
    LotkaVolterra(LotkaVolterra),
    Logistic(StochasticLogistic),
    Competition(CompetitionDiffusion),
}

pub fn build_model(name: &str, params: &Params) -> Result<BuiltinModel> {
    Ok(match name.parse::<ModelName>()? {
        ModelName::MichaelisMenten => BuiltinModel::MichaelisMenten(MichaelisMenten::from_params(params)?),
        ModelName::LotkaVolterraWf => BuiltinModel::LotkaVolterra(LotkaVolterra::from_params(params)?),
        ModelName::StochasticLogistic => BuiltinModel::Logistic(StochasticLogistic::from_params(params)?),
        ModelName::CompetitionDiffusion => BuiltinModel::Competition(CompetitionDiffusion::from_params(params)?),
    })
}

impl BuiltinModel {
    pub fn name(&self) -> ModelName {
        match self {
            BuiltinModel::MichaelisMenten(_) => ModelName::MichaelisMenten,
            BuiltinModel::LotkaVolterra(_) => ModelName::LotkaVolterraWf,
            BuiltinModel::Logistic(_) => ModelName::StochasticLogistic,
            BuiltinModel::Competition(_) => ModelName::CompetitionDiffusion,
        }
    }

    /// The SDE; the particle model has none.
    pub fn sde(&self) -> Option<&SdeSystem> {
        match self {
            BuiltinModel::MichaelisMenten(m) => Some(m.sde()),
            BuiltinModel::LotkaVolterra(m) => Some(m.sde()),
            BuiltinModel::Logistic(m) => Some(m.sde()),
            BuiltinModel::Competition(_) => None,
        }
    }

    /// Preferred manifold description.
    pub fn manifold(&self) -> ManifoldSpec {
        match self {
            BuiltinModel::MichaelisMenten(m) => m.curve_manifold(),
            BuiltinModel::LotkaVolterra(m) => m.manifold(),
            BuiltinModel::Logistic(_) | BuiltinModel::Competition(_) => ManifoldSpec::Unknown,
        }
    }

    pub fn jump(&self) -> Option<&JumpModel> {
        match self {
            BuiltinModel::LotkaVolterra(m) => Some(m.jump()),
            BuiltinModel::Logistic(m) => Some(m.jump()),
            _ => None,
        }
    }

    /// Closed-form π where the model has one.
    pub fn project(&self, x: &DVector<f64>) -> Option<Result<DVector<f64>>> {
        match self {
            BuiltinModel::MichaelisMenten(m) => Some(m.project(x)),
            BuiltinModel::LotkaVolterra(m) => Some(m.project(x)),
            _ => None,
        }
    }

    pub fn reference_reduced(&self, z: &DVector<f64>) -> Result<ReducedSystem> {
        match self {
            BuiltinModel::MichaelisMenten(m) => m.reference_reduced(z),
            BuiltinModel::LotkaVolterra(m) => m.reference_reduced(z),
            other => Err(Error::Config(format!(
                "{} has no closed-form reduction",
                other.name().as_str()
            ))),
        }
    }
}
