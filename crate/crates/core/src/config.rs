//! TOML model definitions: a built-in model with parameters, or drift and noise expressions.
//!
//! ```toml
//! dim = 2
//! noise_dim = 1
//! epsilon = 0.01
//! mu = 0.01
//! f = ["-x2 + x1^2", "0"]
//! h = ["-x1", "0"]
//! G = [["0.1"], ["0"]]
//!
//! [params]
//! k = 2.0
//!
//! [manifold]
//! kind = "curve"
//! gamma = ["s^2", "s"]
//! parameter = "x2"
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, Scope};
use crate::manifold::{CoDimOneChart, CurveChart, ManifoldSpec};
use crate::model::SdeSystem;
use crate::models::{build_model, BuiltinModel, Params};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    dim: Option<usize>,
    noise_dim: Option<usize>,
    epsilon: Option<f64>,
    mu: Option<f64>,
    builtin: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    f: Option<Vec<String>>,
    h: Option<Vec<String>>,
    #[serde(rename = "G")]
    g: Option<Vec<Vec<String>>>,
    manifold: Option<RawManifold>,
    #[serde(default)]
    run: RunSettings,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawManifold {
    /// `gamma` in the variable `s`; optional `parameter` maps a state back to `s`.
    Curve { gamma: Vec<String>, parameter: Option<String> },
    /// `f = φ·r`.
    Codim1 { phi: String, r: Vec<String> },
    General { slow_dim: usize },
    Unknown,
}

/// Optional simulation settings; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub n_out: Option<usize>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub x0: Option<Vec<f64>>,
}

/// A model read from a config file.
#[derive(Debug, Clone)]
pub enum ModelSource {
    Builtin(BuiltinModel),
    Expressions { system: SdeSystem, manifold: ManifoldSpec },
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub source: ModelSource,
    pub run: RunSettings,
}

impl ModelConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawModel = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let source = match &raw.builtin {
            Some(name) => builtin_source(name, &raw)?,
            None => expression_source(&raw)?,
        };
        for &tol in [raw.run.dt, raw.run.t_end].iter().flatten() {
            if !(tol > 0.0) {
                return Err(Error::Config(format!("run settings must be positive, got {tol}")));
            }
        }
        Ok(Self { source, run: raw.run })
    }

    pub fn builtin(model: BuiltinModel) -> Self {
        Self {
            source: ModelSource::Builtin(model),
            run: RunSettings::default(),
        }
    }

    pub fn sde(&self) -> Option<&SdeSystem> {
        match &self.source {
            ModelSource::Builtin(m) => m.sde(),
            ModelSource::Expressions { system, .. } => Some(system),
        }
    }

    pub fn manifold(&self) -> ManifoldSpec {
        match &self.source {
            ModelSource::Builtin(m) => m.manifold(),
            ModelSource::Expressions { manifold, .. } => manifold.clone(),
        }
    }

    pub fn label(&self) -> &str {
        match &self.source {
            ModelSource::Builtin(m) => m.name().as_str(),
            ModelSource::Expressions { system, .. } => system.label(),
        }
    }

    pub fn as_builtin(&self) -> Option<&BuiltinModel> {
        match &self.source {
            ModelSource::Builtin(m) => Some(m),
            ModelSource::Expressions { .. } => None,
        }
    }
}

fn builtin_source(name: &str, raw: &RawModel) -> Result<ModelSource> {
    if raw.f.is_some() || raw.h.is_some() || raw.g.is_some() || raw.manifold.is_some() {
        return Err(Error::Config("a builtin model takes no f, h, G or [manifold] entries".into()));
    }
    let mut params: Params = raw.params.iter().map(|(k, &v)| (k.clone(), v)).collect();
    for (key, value) in [("epsilon", raw.epsilon), ("mu", raw.mu)] {
        if let Some(v) = value {
            params.insert(key, v);
        }
    }
    let model = build_model(name, &params)?;
    if let Some(sde) = model.sde() {
        for (what, declared, actual) in [("dim", raw.dim, sde.dim()), ("noise_dim", raw.noise_dim, sde.noise_dim())] {
            if declared.is_some_and(|d| d != actual) {
                return Err(Error::Config(format!("{name} has {what} = {actual}, config says {}", declared.unwrap_or(0))));
            }
        }
    }
    Ok(ModelSource::Builtin(model))
}

fn parse_all(sources: &[String], scope: &Scope) -> Result<Vec<Expr>> {
    sources.iter().map(|s| Expr::parse(s, scope)).collect()
}

fn expression_source(raw: &RawModel) -> Result<ModelSource> {
    let f_src = raw
        .f
        .as_ref()
        .ok_or_else(|| Error::Config("config needs either `builtin` or an `f` array".into()))?;
    let d = raw.dim.unwrap_or(f_src.len());
    if d == 0 || f_src.len() != d {
        return Err(Error::Config(format!("f has {} entries, dim is {d}", f_src.len())));
    }
    let scope = Scope::state(d).with_constants(raw.params.iter().map(|(k, &v)| (k.as_str(), v)));
    let f = parse_all(f_src, &scope)?;
    let h = match &raw.h {
        Some(src) if src.len() != d => return Err(Error::Config(format!("h has {} entries, dim is {d}", src.len()))),
        Some(src) => Some(parse_all(src, &scope)?),
        None => None,
    };
    let g_rows = raw.g.clone().unwrap_or_default();
    let s = raw.noise_dim.or(g_rows.first().map(Vec::len)).unwrap_or(d);
    if !g_rows.is_empty() && (g_rows.len() != d || g_rows.iter().any(|r| r.len() != s)) {
        return Err(Error::Config(format!("G must be a {d}×{s} array of strings")));
    }
    let g: Vec<Vec<Expr>> = g_rows.iter().map(|r| parse_all(r, &scope)).collect::<Result<_>>()?;

    let mut builder = SdeSystem::builder(d, s).outer(move |x, o| {
        for (oi, e) in o.iter_mut().zip(&f) {
            *oi = e.eval(x);
        }
    });
    if let Some(h) = h {
        builder = builder.inner(move |x, o| {
            for (oi, e) in o.iter_mut().zip(&h) {
                *oi = e.eval(x);
            }
        });
    }
    if !g.is_empty() {
        builder = builder.noise(move |x, m| {
            for (i, row) in g.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    m[(i, j)] = e.eval(x);
                }
            }
        });
    }
    let system = builder
        .scales(raw.epsilon.unwrap_or(0.0), raw.mu.unwrap_or(0.0))
        .label("expression")
        .build()?;
    let manifold = match &raw.manifold {
        None => ManifoldSpec::Unknown,
        Some(m) => manifold_from(m, d, raw)?,
    };
    Ok(ModelSource::Expressions { system, manifold })
}

fn manifold_from(raw: &RawManifold, d: usize, model: &RawModel) -> Result<ManifoldSpec> {
    let consts = || model.params.iter().map(|(k, &v)| (k.as_str(), v));
    let state_scope = Scope::state(d).with_constants(consts());
    Ok(match raw {
        RawManifold::Curve { gamma, parameter } => {
            if gamma.len() != d {
                return Err(Error::Config(format!("gamma has {} entries, dim is {d}", gamma.len())));
            }
            let curve_scope = Scope::with_variables(["s"]).with_constants(consts());
            let gamma = Arc::new(parse_all(gamma, &curve_scope)?);
            let mut chart = CurveChart::new(move |s| DVector::from_iterator(gamma.len(), gamma.iter().map(|e| e.eval(&[s]))));
            if let Some(p) = parameter {
                let p = Expr::parse(p, &state_scope)?;
                chart = chart.with_parameter_of(move |x| p.eval(x.as_slice()));
            }
            ManifoldSpec::Parametrized1D(chart)
        }
        RawManifold::Codim1 { phi, r } => {
            if r.len() != d {
                return Err(Error::Config(format!("r has {} entries, dim is {d}", r.len())));
            }
            let phi = Expr::parse(phi, &state_scope)?;
            let r = parse_all(r, &state_scope)?;
            ManifoldSpec::CoDimOne(CoDimOneChart::new(
                move |x| phi.eval(x.as_slice()),
                move |x| DVector::from_iterator(r.len(), r.iter().map(|e| e.eval(x.as_slice()))),
            ))
        }
        RawManifold::General { slow_dim } => {
            if *slow_dim == 0 || *slow_dim >= d {
                return Err(Error::Config(format!("slow_dim must lie in 1..{d}, got {slow_dim}")));
            }
            ManifoldSpec::General { slow_dim: *slow_dim }
        }
        RawManifold::Unknown => ManifoldSpec::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_with_overrides() {
        let c = ModelConfig::from_toml_str(
            "builtin = \"michaelis_menten\"\nepsilon = 0.02\n[params]\nalpha = 2.0\n",
        )
        .unwrap();
        assert_eq!(c.sde().unwrap().epsilon(), 0.02);
        assert_eq!(c.manifold().kind(), "parametrized_1d");
    }

    #[test]
    fn expression_model_evaluates() {
        let c = ModelConfig::from_toml_str(
            "dim = 2\nmu = 0.5\nf = [\"-k*x1\", \"0\"]\nG = [[\"1\"], [\"x1\"]]\n[params]\nk = 3.0\n[manifold]\nkind = \"general\"\nslow_dim = 1\n",
        )
        .unwrap();
        let sde = c.sde().unwrap();
        let x = DVector::from_vec(vec![2.0, 1.0]);
        assert_eq!(sde.outer(&x).unwrap()[0], -6.0);
        assert_eq!(sde.noise(&x).unwrap()[(1, 0)], 2.0);
        assert_eq!(sde.noise_dim(), 1);
    }

    #[test]
    fn bad_configs_are_config_errors() {
        for bad in [
            "builtin = \"nope\"",
            "dim = 2\nf = [\"x1\"]",
            "f = [\"x1 +\"]",
            "builtin = \"michaelis_menten\"\n[params]\ngamma = 1.0",
            "builtin = \"michaelis_menten\"\ndim = 3",
            "f = [\"x1\"]\nunknown_key = 1",
        ] {
            assert!(ModelConfig::from_toml_str(bad).unwrap_err().is_config(), "{bad}");
        }
    }
}
