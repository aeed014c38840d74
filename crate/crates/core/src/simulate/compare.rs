use std::io::Write;

use nalgebra::DVector;

use super::ensemble::csv_writer;
use super::{Projector, TrajectoryEnsemble};
use crate::error::{Error, Result};
use crate::flow::{integrate_outer, pi_map, FlowOptions, PiOptions};
use crate::model::SdeSystem;

/// How full-model states are brought onto Γ before comparison.
#[derive(Debug, Clone)]
pub enum FullView {
    /// `π(x(t))`.
    Projected(Projector),
    /// `x̂(t) = x(t) − ξ_{x₀}(t) + π(x₀)`: the deterministic fast transient is subtracted.
    TransientRemoved {
        flow_path: Vec<DVector<f64>>,
        limit: DVector<f64>,
    },
}

impl FullView {
    /// Transient removal for paths started at `x0`, sampled on `times`.
    pub fn transient_removed(system: &SdeSystem, x0: &DVector<f64>, times: &[f64]) -> Result<Self> {
        let deterministic = system.with_scales(0.0, 0.0)?;
        let flow_path = integrate_outer(&deterministic, x0, times, &FlowOptions::default())?.states;
        let limit = pi_map(&deterministic, x0, &PiOptions::default())?.endpoint;
        Ok(FullView::TransientRemoved { flow_path, limit })
    }

    pub fn apply(&self, full: &TrajectoryEnsemble) -> Result<TrajectoryEnsemble> {
        let d = full.dim();
        match self {
            FullView::Projected(p) => full.map_states(d, |_, x| Ok(p.apply(&DVector::from_column_slice(x))?.as_slice().to_vec())),
            FullView::TransientRemoved { flow_path, limit } => {
                if flow_path.len() != full.times().len() {
                    return Err(Error::Shape("transient path does not match the time grid".into()));
                }
                full.map_states(d, |t, x| Ok((0..d).map(|i| x[i] - flow_path[t][i] + limit[i]).collect()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub time: f64,
    pub mean_full: f64,
    pub mean_reduced: f64,
    /// `√(se₁² + se₂²)` for the mean difference.
    pub se_mean: f64,
    pub var_full: f64,
    pub var_reduced: f64,
    pub se_var: f64,
    pub mean_ok: bool,
    pub var_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentComparison {
    pub rows: Vec<ComparisonRow>,
    pub tolerance: MomentTolerance,
}

/// A difference passes when it is at most `k_se` combined standard errors plus an absolute floor
/// (`abs_floor` for means, `abs_floor²` for variances).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTolerance {
    pub k_se: f64,
    pub abs_floor: f64,
}

impl MomentTolerance {
    pub fn new(k_se: f64, abs_floor: f64) -> Self {
        Self { k_se, abs_floor }
    }
}

impl Default for MomentTolerance {
    /// Three standard errors with a floor of `1e-6`, below which both ensembles are treated as collapsed.
    fn default() -> Self {
        Self::new(3.0, 1e-6)
    }
}

impl MomentComparison {
    fn fraction(&self, pred: impl Fn(&ComparisonRow) -> bool) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        self.rows.iter().filter(|r| pred(r)).count() as f64 / self.rows.len() as f64
    }

    pub fn fraction_mean_ok(&self) -> f64 {
        self.fraction(|r| r.mean_ok)
    }

    pub fn fraction_var_ok(&self) -> f64 {
        self.fraction(|r| r.var_ok)
    }

    pub fn max_mean_diff(&self) -> f64 {
        self.rows.iter().map(|r| (r.mean_full - r.mean_reduced).abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out)?;
        w.write_record([
            "time",
            "mean_full",
            "mean_reduced",
            "se_mean",
            "var_full",
            "var_reduced",
            "se_var",
            "mean_ok",
            "var_ok",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.time.to_string(),
                r.mean_full.to_string(),
                r.mean_reduced.to_string(),
                r.se_mean.to_string(),
                r.var_full.to_string(),
                r.var_reduced.to_string(),
                r.se_var.to_string(),
                r.mean_ok.to_string(),
                r.var_ok.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-time mean and variance of coordinate `ia` of `a` against coordinate `ib` of `b`.
pub fn compare_moments(
    a: &TrajectoryEnsemble,
    ia: usize,
    b: &TrajectoryEnsemble,
    ib: usize,
    tol: MomentTolerance,
) -> Result<MomentComparison> {
    let same_grid = a.times().len() == b.times().len()
        && a.times().iter().zip(b.times()).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs()));
    if !same_grid {
        return Err(Error::Shape("ensembles are recorded on different time grids".into()));
    }
    if ia >= a.dim() || ib >= b.dim() {
        return Err(Error::Shape("component index out of range".into()));
    }
    let (ma, mb) = (a.moments(), b.moments());
    let rows = a
        .times()
        .iter()
        .enumerate()
        .map(|(t, &time)| {
            let se_mean = ma.se_mean(t, ia).hypot(mb.se_mean(t, ib));
            let se_var = ma.se_var(t, ia).hypot(mb.se_var(t, ib));
            let (m1, m2) = (ma.mean(t, ia), mb.mean(t, ib));
            let (v1, v2) = (ma.var(t, ia), mb.var(t, ib));
            ComparisonRow {
                time,
                mean_full: m1,
                mean_reduced: m2,
                se_mean,
                var_full: v1,
                var_reduced: v2,
                se_var,
                mean_ok: (m1 - m2).abs() <= tol.k_se * se_mean + tol.abs_floor,
                var_ok: (v1 - v2).abs() <= tol.k_se * se_var + tol.abs_floor * tol.abs_floor,
            }
        })
        .collect();
    Ok(MomentComparison { rows, tolerance: tol })
}

/// Brings `full` onto Γ via `view`, then compares it with `reduced`.
pub fn compare_projected(
    full: &TrajectoryEnsemble,
    view: &FullView,
    full_component: usize,
    reduced: &TrajectoryEnsemble,
    reduced_component: usize,
    tol: MomentTolerance,
) -> Result<MomentComparison> {
    let on = view.apply(full)?;
    compare_moments(&on, full_component, reduced, reduced_component, tol)
}
