//! The `slowmani` command line.
//!
//! Every subcommand writes its tables and plots into `--out` together with a
//! `report.json` holding per-check verdicts. Exit codes: 0 when every check passes,
//! 1 when a check fails, 2 for configuration or I/O errors, 3 for numerical failures.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use crate::config::{ModelConfig, RunSettings};
use crate::diff::FdStep;
use crate::error::{Error, Result};
use crate::manifold::ManifoldSpec;
use crate::model::SdeSystem;
use crate::models::{build_model, BuiltinModel, Params};
use crate::plot::LineChart;
use crate::reduction::{a3_residual, reduce_at, ManifoldPoint, Method, ReducedSystem, ReductionOptions};
use crate::simulate::{
    compare_projected, csv_writer, simulate_full, simulate_particles_competition, simulate_reduced, simulate_ssa,
    AssembledReduced, EnsembleOptions, FullView, MmReducedScalar, MomentTolerance, ParticleOptions, Projector, ReducedDynamics,
    SsaOptions, StepGrid, TrajectoryEnsemble, DEFAULT_REPROJECT_EVERY,
};

#[derive(Debug, Parser)]
#[command(name = "slowmani", version, about = "Slow-manifold reduction of SDEs with intrinsic noise")]
pub struct Cli {
    /// Root seed for all random streams (default 1, or `run.seed` from the config).
    #[arg(long, global = true, env = "SLOWMANI_SEED")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "slowmani-out")]
    pub out: PathBuf,
    /// Tolerance for the command's checks (each command has its own default).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// P, Q, g and the reduced coefficients at manifold points.
    Reduce(ReduceArgs),
    /// Euler–Maruyama ensemble of the full (or reduced) SDE.
    Simulate(SimulateArgs),
    /// Gillespie ensemble of a jump model.
    Ssa(SsaArgs),
    /// Full against reduced moments, or particles against the spread prediction.
    Compare(CompareArgs),
    /// Flow-map finite differences against the general route.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// TOML model definition.
    #[arg(long, conflicts_with = "builtin")]
    pub config: Option<PathBuf>,
    /// Built-in model name.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Model parameter as `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_key_value)]
    pub params: Vec<(String, f64)>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Number of recorded intervals.
    #[arg(long)]
    pub n_out: Option<usize>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Manifold point: a chart parameter or a full state, comma separated; repeatable.
    #[arg(long, allow_negative_numbers = true)]
    pub at: Vec<String>,
    /// Route: general, one_d, codim1, oracle or reference.
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Simulate the reduced SDE instead, started at the projection of x0.
    #[arg(long)]
    pub reduced: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SsaArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Coordinate to compare (1-based).
    #[arg(long, default_value_t = 1)]
    pub component: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub at: Vec<String>,
    /// Finite-difference step of the oracle.
    #[arg(long, default_value_t = 1e-3)]
    pub fd_step: f64,
}

fn parse_key_value(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// One pass/fail verdict in `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    /// Passes when `value ≤ threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
        }
    }

    /// Passes when `value ≥ threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value >= threshold,
            value,
            threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub model: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
}

impl Report {
    fn new(command: &str, model: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            model: model.into(),
            seed,
            passed: true,
            checks: Vec::new(),
            files: Vec::new(),
        }
    }

    fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }
}

/// Parses the process arguments, runs, prints a summary and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            // a closed stdout (e.g. piped into `head`) must not turn a finished run into a panic
            let mut out = std::io::stdout().lock();
            for c in &report.checks {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(out, "{verdict} {} = {:.6e} (threshold {:.3e})", c.name, c.value, c.threshold);
            }
            let _ = writeln!(out, "wrote {} files to {}", report.files.len(), cli.out.display());
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        2
    } else {
        3
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    if cli.tol.is_some_and(|t| !(t > 0.0)) {
        return Err(Error::Config("--tol must be > 0".into()));
    }
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", cli.out.display())))?;
    let report = match &cli.command {
        Command::Reduce(a) => cmd_reduce(cli, a),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::Ssa(a) => cmd_ssa(cli, a),
        Command::Compare(a) => cmd_compare(cli, a),
        Command::Oracle(a) => cmd_oracle(cli, a),
    }?;
    let path = cli.out.join("report.json");
    let mut report = report;
    report.files.push("report.json".into());
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, json + "\n")?;
    Ok(report)
}

fn load_model(args: &ModelArgs) -> Result<ModelConfig> {
    let shortcuts = [("alpha", args.alpha), ("beta", args.beta), ("epsilon", args.epsilon), ("mu", args.mu)];
    match (&args.config, &args.builtin) {
        (Some(path), _) => {
            if !args.params.is_empty() || shortcuts.iter().any(|(_, v)| v.is_some()) {
                return Err(Error::Config("parameters go in the config file when --config is used".into()));
            }
            ModelConfig::from_path(path)
        }
        (None, Some(name)) => {
            let mut params: Params = args.params.iter().cloned().collect();
            for (k, v) in shortcuts {
                if let Some(v) = v {
                    params.insert(k, v);
                }
            }
            Ok(ModelConfig::builtin(build_model(name, &params)?))
        }
        (None, None) => Err(Error::Config("give a model with --builtin <name> or --config <file>".into())),
    }
}

fn require_sde(model: &ModelConfig) -> Result<&SdeSystem> {
    model
        .sde()
        .ok_or_else(|| Error::Config(format!("{} is a particle model without an SDE form", model.label())))
}

/// Flag, then `[run]` table, then the model's default.
#[derive(Debug, Clone, PartialEq)]
struct Settings {
    dt: f64,
    t_end: f64,
    n_out: usize,
    replicates: usize,
    x0: Option<Vec<f64>>,
    seed: u64,
}

fn settings(cli: &Cli, run: &RunArgs, file: &RunSettings, default: Settings) -> Result<Settings> {
    let s = Settings {
        dt: run.dt.or(file.dt).unwrap_or(default.dt),
        t_end: run.t_end.or(file.t_end).unwrap_or(default.t_end),
        n_out: run.n_out.or(file.n_out).unwrap_or(default.n_out),
        replicates: run.replicates.or(file.replicates).unwrap_or(default.replicates),
        x0: run.x0.clone().or_else(|| file.x0.clone()).or(default.x0),
        seed: cli.seed.or(file.seed).unwrap_or(default.seed),
    };
    if !(s.dt > 0.0 && s.t_end > 0.0) || s.replicates == 0 || s.n_out == 0 {
        return Err(Error::Config("dt, t_end, n_out and replicates must all be positive".into()));
    }
    Ok(s)
}

fn default_settings(model: &ModelConfig) -> Settings {
    let base = Settings {
        dt: 0.01,
        t_end: 10.0,
        n_out: 100,
        replicates: 200,
        x0: None,
        seed: 1,
    };
    match model.as_builtin() {
        Some(BuiltinModel::MichaelisMenten(m)) => Settings {
            dt: 0.1,
            t_end: 50.0 / m.sde().epsilon(),
            replicates: 1000,
            x0: Some(vec![1.0, 0.0]),
            ..base
        },
        Some(BuiltinModel::LotkaVolterra(m)) => {
            let n = m.species();
            let x = m.from_frequency(&DVector::from_element(n, 1.0 / n as f64));
            Settings {
                n_out: 20,
                replicates: 500,
                x0: Some(x.iter().copied().collect()),
                ..base
            }
        }
        Some(BuiltinModel::Logistic(_)) => Settings {
            t_end: 20.0,
            x0: Some(vec![0.1]),
            ..base
        },
        Some(BuiltinModel::Competition(_)) => Settings {
            dt: 0.05,
            t_end: 400.0,
            n_out: 80,
            replicates: 2000,
            ..base
        },
        None => base,
    }
}

fn initial_state(s: &Settings, dim: usize) -> Result<DVector<f64>> {
    let x0 = s
        .x0
        .as_ref()
        .ok_or_else(|| Error::Config("this model needs an initial state: pass --x0 or set run.x0".into()))?;
    if x0.len() != dim {
        return Err(Error::Config(format!("x0 has {} entries, model dimension is {dim}", x0.len())));
    }
    Ok(DVector::from_column_slice(x0))
}

fn projector(model: &ModelConfig) -> Result<Projector> {
    match model.as_builtin() {
        Some(b @ (BuiltinModel::MichaelisMenten(_) | BuiltinModel::LotkaVolterra(_))) => {
            let b = b.clone();
            Ok(Projector::closed_form(move |x| b.project(x).unwrap_or_else(|| Ok(x.clone()))))
        }
        _ => Ok(Projector::flow(require_sde(model)?)),
    }
}

fn manifold_points(model: &ModelConfig, at: &[String]) -> Result<Vec<ManifoldPoint>> {
    if at.is_empty() {
        return match model.as_builtin() {
            Some(BuiltinModel::MichaelisMenten(_)) => Ok(vec![ManifoldPoint::Param(1.0)]),
            Some(BuiltinModel::LotkaVolterra(m)) => {
                let n = m.species();
                Ok(vec![ManifoldPoint::State(m.from_frequency(&DVector::from_element(n, 1.0 / n as f64)))])
            }
            _ => Err(Error::Config("pass at least one manifold point with --at".into())),
        };
    }
    let dim = require_sde(model)?.dim();
    at.iter()
        .map(|s| {
            let v = s
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad --at value `{s}`: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            match v.len() {
                1 if dim != 1 => Ok(ManifoldPoint::Param(v[0])),
                n if n == dim => Ok(ManifoldPoint::State(DVector::from_vec(v))),
                n => Err(Error::Config(format!("--at has {n} entries; give one chart parameter or {dim} coordinates"))),
            }
        })
        .collect()
}

fn create(out: &Path, name: &str, report: &mut Report) -> Result<BufWriter<File>> {
    let f = File::create(out.join(name))
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", out.join(name).display())))?;
    report.files.push(name.into());
    Ok(BufWriter::new(f))
}

fn write_chart(out: &Path, name: &str, chart: &LineChart, report: &mut Report) -> Result<()> {
    chart.write(out.join(name))?;
    report.files.push(name.into());
    Ok(())
}

/// Columns `point, method, x_i, P_i_j, Q_i_j_k, g_i, drift_i, noise_i_s`.
fn write_reduction_csv(rows: &[ReducedSystem], w: impl std::io::Write) -> Result<()> {
    let mut w = csv_writer(w)?;
    let Some(first) = rows.first() else {
        return Ok(());
    };
    let d = first.base_point.len();
    let s = first.projected_noise.ncols();
    let mut header = vec!["point".to_string(), "method".to_string()];
    header.extend((1..=d).map(|i| format!("x_{i}")));
    header.extend((1..=d).flat_map(|i| (1..=d).map(move |j| format!("P_{i}_{j}"))));
    header.extend((1..=d).flat_map(|i| (1..=d).flat_map(move |j| (1..=d).map(move |k| format!("Q_{i}_{j}_{k}")))));
    header.extend((1..=d).map(|i| format!("g_{i}")));
    header.extend((1..=d).map(|i| format!("drift_{i}")));
    header.extend((1..=d).flat_map(|i| (1..=s).map(move |c| format!("noise_{i}_{c}"))));
    w.write_record(&header)?;
    for (n, r) in rows.iter().enumerate() {
        let mut row = vec![n.to_string(), r.method.as_str().to_string()];
        row.extend(r.base_point.iter().map(f64::to_string));
        row.extend((0..d).flat_map(|i| (0..d).map(move |j| r.p[(i, j)].to_string())));
        row.extend(r.q.flat().map(|v| v.to_string()));
        row.extend(r.g.iter().map(f64::to_string));
        let noise = r.noise();
        row.extend(r.drift().iter().map(f64::to_string));
        row.extend((0..d).flat_map(|i| (0..s).map(|c| noise[(i, c)].to_string()).collect::<Vec<_>>()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_reduce(cli: &Cli, args: &ReduceArgs) -> Result<Report> {
    let model = load_model(&args.model)?;
    let system = require_sde(&model)?;
    let spec = model.manifold();
    let method = args.method.as_deref().map(str::parse::<Method>).transpose()?;
    let points = manifold_points(&model, &args.at)?;
    let mut report = Report::new("reduce", model.label(), cli.seed.unwrap_or(1));
    let opts = ReductionOptions::default();
    let mut rows = Vec::with_capacity(points.len());
    let mut summary = String::new();
    for (n, at) in points.iter().enumerate() {
        let r = if method == Some(Method::Reference) {
            let builtin = model
                .as_builtin()
                .ok_or_else(|| Error::Config("the reference route needs a built-in model".into()))?;
            let z = match (at, &spec) {
                (ManifoldPoint::State(z), _) => z.clone(),
                (ManifoldPoint::Param(s), ManifoldSpec::Parametrized1D(chart)) => chart.point(*s),
                _ => return Err(Error::Config("a chart parameter needs a parametrized 1-D manifold".into())),
            };
            builtin.reference_reduced(&z)?
        } else {
            reduce_at(system, &spec, at, method, &opts)?
        };
        let tol = cli.tol.unwrap_or(if r.method == Method::Oracle { 1e-3 } else { 1e-6 });
        let z = &r.base_point;
        let j = system.jacobian(z, FdStep::Auto)?;
        let hs = system.hessians(z, FdStep::Auto)?;
        let a3 = a3_residual(&j, &hs, &r.p, &r.q);
        let idem = r.idempotence_defect();
        let null = (&r.p * &j).amax();
        report.check(Check::at_most(format!("point{n}.idempotence"), idem, tol));
        report.check(Check::at_most(format!("point{n}.a3_residual"), a3, tol));
        report.check(Check::at_most(format!("point{n}.pj_null"), null, tol));
        if let Some(reference) = model.as_builtin().and_then(|b| b.reference_reduced(z).ok()) {
            let dp = (&r.p - &reference.p).amax();
            let dq = r.q.max_abs_diff(&reference.q);
            let dg = (&r.g - &reference.g).amax();
            report.check(Check::at_most(format!("point{n}.reference_max_diff"), dp.max(dq).max(dg), tol));
        }
        summary.push_str(&format!(
            "point {n}: z = {:?}\n  method {}\n  |P^2 - P| = {idem:.3e}\n  A3 residual = {a3:.3e}\n  |P J| = {null:.3e}\n  |Q| = {:.6e}\n  g = {:?}\n",
            z.as_slice(),
            r.method,
            r.q.amax(),
            r.g.as_slice()
        ));
        rows.push(r);
    }
    write_reduction_csv(&rows, create(&cli.out, "reduction.csv", &mut report)?)?;
    std::fs::write(cli.out.join("summary.txt"), summary)?;
    report.files.push("summary.txt".into());
    Ok(report)
}

fn grid_options(s: &Settings) -> Result<EnsembleOptions> {
    Ok(EnsembleOptions {
        grid: StepGrid::new(s.dt, s.t_end, s.n_out)?,
        n_rep: s.replicates,
        seed: s.seed,
    })
}

fn reduced_dynamics(model: &ModelConfig, system: &SdeSystem) -> Result<Box<dyn ReducedDynamics>> {
    if let Some(BuiltinModel::MichaelisMenten(m)) = model.as_builtin() {
        return Ok(Box::new(MmReducedScalar(m.clone())));
    }
    Ok(Box::new(AssembledReduced {
        system: system.clone(),
        manifold: model.manifold(),
        method: None,
        opts: ReductionOptions::default(),
        projector: projector(model)?,
    }))
}

/// Starting point of the reduced dynamics for the full initial state `x0`.
fn reduced_start(model: &ModelConfig, x0: &DVector<f64>) -> Result<DVector<f64>> {
    let z = projector(model)?.apply(x0)?;
    Ok(match model.as_builtin() {
        Some(BuiltinModel::MichaelisMenten(_)) => DVector::from_element(1, z[0]),
        _ => z,
    })
}

/// Mean of `‖x − π(x)‖_∞` at each recorded time.
fn distance_trace(ensemble: &TrajectoryEnsemble, projector: &Projector) -> Result<Vec<(f64, f64)>> {
    let dist = ensemble.map_states(1, |_, x| {
        let x = DVector::from_column_slice(x);
        Ok(vec![(&x - projector.apply(&x)?).amax()])
    })?;
    let m = dist.moments();
    Ok(ensemble.times().iter().enumerate().map(|(t, &time)| (time, m.mean(t, 0))).collect())
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<Report> {
    let model = load_model(&args.model)?;
    let system = require_sde(&model)?;
    let s = settings(cli, &args.run, &model.run, default_settings(&model))?;
    let x0 = initial_state(&s, system.dim())?;
    let opts = grid_options(&s)?;
    let mut report = Report::new("simulate", model.label(), s.seed);
    let ensemble = if args.reduced {
        let dynamics = reduced_dynamics(&model, system)?;
        simulate_reduced(dynamics.as_ref(), &reduced_start(&model, &x0)?, &opts, DEFAULT_REPROJECT_EVERY)?
    } else {
        simulate_full(system, &x0, &opts)?
    };
    ensemble.write_csv(create(&cli.out, "trajectories.csv", &mut report)?)?;
    ensemble.moments().write_csv(create(&cli.out, "moments.csv", &mut report)?)?;
    if !args.reduced && matches!(model.as_builtin(), Some(BuiltinModel::MichaelisMenten(_) | BuiltinModel::LotkaVolterra(_))) {
        let trace = distance_trace(&ensemble, &projector(&model)?)?;
        let chart = LineChart::new("distance to the slow manifold").axes("t", "mean |x - pi(x)|").line("full", trace);
        write_chart(&cli.out, "distance.svg", &chart, &mut report)?;
    }
    Ok(report)
}

fn cmd_ssa(cli: &Cli, args: &SsaArgs) -> Result<Report> {
    let model = load_model(&args.model)?;
    let jump = model
        .as_builtin()
        .and_then(BuiltinModel::jump)
        .ok_or_else(|| Error::Config(format!("{} has no jump-process form", model.label())))?;
    let s = settings(cli, &args.run, &model.run, default_settings(&model))?;
    let x0 = initial_state(&s, jump.dim())?;
    let opts = SsaOptions {
        t_end: s.t_end,
        n_out: s.n_out,
        n_rep: s.replicates,
        seed: s.seed,
    };
    let mut report = Report::new("ssa", model.label(), s.seed);
    let ensemble = simulate_ssa(jump, &x0, &opts)?;
    ensemble.write_csv(create(&cli.out, "trajectories.csv", &mut report)?)?;
    ensemble.moments().write_csv(create(&cli.out, "moments.csv", &mut report)?)?;
    if let Some(BuiltinModel::LotkaVolterra(lv)) = model.as_builtin() {
        if lv.selection().is_neutral() {
            let p = ensemble.map_states(1, |_, x| Ok(vec![x[0] / x.iter().sum::<f64>()]))?;
            let p0 = x0[0] / x0.sum();
            let predicted = p0 * (1.0 - p0) / lv.effective_population_size();
            let slope = p.moments().variance_growth_slope(0);
            let tol = cli.tol.unwrap_or(0.1);
            report.check(Check::at_most("wf_variance_slope_rel_error", ((slope - predicted) / predicted).abs(), tol));
        }
    }
    Ok(report)
}

fn cmd_compare(cli: &Cli, args: &CompareArgs) -> Result<Report> {
    let model = load_model(&args.model)?;
    let s = settings(cli, &args.run, &model.run, default_settings(&model))?;
    if let Some(BuiltinModel::Competition(c)) = model.as_builtin() {
        return compare_competition(cli, c, &s);
    }
    let system = require_sde(&model)?;
    let x0 = initial_state(&s, system.dim())?;
    let opts = grid_options(&s)?;
    let mut report = Report::new("compare", model.label(), s.seed);
    let full = simulate_full(system, &x0, &opts)?;
    let dynamics = reduced_dynamics(&model, system)?;
    let reduced_opts = EnsembleOptions {
        seed: s.seed.wrapping_add(1),
        ..opts
    };
    let reduced = simulate_reduced(dynamics.as_ref(), &reduced_start(&model, &x0)?, &reduced_opts, DEFAULT_REPROJECT_EVERY)?;
    let i = args.component.checked_sub(1).filter(|&i| i < reduced.dim()).ok_or_else(|| {
        Error::Config(format!("--component must lie in 1..={}", reduced.dim()))
    })?;
    let proj = projector(&model)?;
    let cmp = compare_projected(&full, &FullView::Projected(proj.clone()), i, &reduced, i, MomentTolerance::default())?;
    full.moments().write_csv(create(&cli.out, "moments.csv", &mut report)?)?;
    cmp.write_csv(create(&cli.out, "comparison.csv", &mut report)?)?;
    let frac = 1.0 - cli.tol.unwrap_or(0.05);
    report.check(Check::at_least("mean_within_3se_fraction", cmp.fraction_mean_ok(), frac));
    report.check(Check::at_least("var_within_3se_fraction", cmp.fraction_var_ok(), frac));

    let overlay = LineChart::new("full (projected) against reduced")
        .axes("t", format!("x{}", i + 1))
        .line("mean pi(x)", cmp.rows.iter().map(|r| (r.time, r.mean_full)))
        .dashed("mean z", cmp.rows.iter().map(|r| (r.time, r.mean_reduced)))
        .line("one full path", full.times().iter().enumerate().map(|(t, &time)| (time, full.state(0, t)[i])))
        .dashed("one reduced path", reduced.times().iter().enumerate().map(|(t, &time)| (time, reduced.state(0, t)[i])));
    write_chart(&cli.out, "overlay.svg", &overlay, &mut report)?;
    let trace = distance_trace(&full, &proj)?;
    let distance = LineChart::new("distance to the slow manifold").axes("t", "mean |x - pi(x)|").line("full", trace);
    write_chart(&cli.out, "distance.svg", &distance, &mut report)?;
    Ok(report)
}

fn compare_competition(cli: &Cli, model: &crate::models::CompetitionDiffusion, s: &Settings) -> Result<Report> {
    let mut report = Report::new("compare", "competition_diffusion", s.seed);
    let opts = ParticleOptions {
        grid: StepGrid::new(s.dt, s.t_end, s.n_out)?,
        n_rep: s.replicates,
        seed: s.seed,
        births: true,
        deaths: true,
    };
    let series = simulate_particles_competition(model, &opts)?;
    let mut w = csv_writer(create(&cli.out, "comparison.csv", &mut report)?)?;
    w.write_record(["time", "spread_mean", "spread_se", "alive", "predicted"])?;
    for (t, &time) in series.times.iter().enumerate() {
        w.write_record([
            time.to_string(),
            series.mean[t].to_string(),
            series.se[t].to_string(),
            series.alive[t].to_string(),
            model.predicted_spread(time).to_string(),
        ])?;
    }
    w.flush()?;
    let tol = cli.tol.unwrap_or(0.15);
    let limit = model.limiting_spread();
    let late = series.max_relative_deviation(|_| limit, 300.0_f64.min(0.75 * s.t_end));
    let track = series.max_relative_deviation(|t| model.predicted_spread(t), 50.0_f64.min(0.125 * s.t_end));
    report.check(Check::at_most("late_spread_rel_error", late, tol));
    report.check(Check::at_most("spread_tracking_rel_error", track, tol));
    let chart = LineChart::new("mean-square spread")
        .axes("t", "Delta(t)")
        .line("simulated", series.times.iter().copied().zip(series.mean.iter().copied()))
        .dashed("(2 eps/mu)(1 - exp(-2 mu t))", series.times.iter().map(|&t| (t, model.predicted_spread(t))))
        .guide(limit, format!("2 eps/mu = {limit}"));
    write_chart(&cli.out, "spread.svg", &chart, &mut report)?;
    Ok(report)
}

fn cmd_oracle(cli: &Cli, args: &OracleArgs) -> Result<Report> {
    let model = load_model(&args.model)?;
    let system = require_sde(&model)?;
    let spec = match model.manifold() {
        ManifoldSpec::Unknown => {
            return Err(Error::Config(
                "the oracle comparison needs a manifold description for the general route".into(),
            ))
        }
        spec => spec,
    };
    let points = manifold_points(&model, &args.at)?;
    let opts = ReductionOptions {
        oracle_step: args.fd_step,
        ..ReductionOptions::default()
    };
    let tol = cli.tol.unwrap_or(1e-3);
    let mut report = Report::new("oracle", model.label(), cli.seed.unwrap_or(1));
    let mut w = csv_writer(create(&cli.out, "oracle.csv", &mut report)?)?;
    w.write_record(["point", "max_abs_dp", "max_abs_dq"])?;
    for (n, at) in points.iter().enumerate() {
        let general = reduce_at(system, &spec, at, Some(Method::General), &opts)?;
        let oracle = reduce_at(system, &spec, at, Some(Method::Oracle), &opts)?;
        let dp = (&general.p - &oracle.p).amax();
        let dq = general.q.max_abs_diff(&oracle.q);
        w.write_record([n.to_string(), dp.to_string(), dq.to_string()])?;
        report.check(Check::at_most(format!("point{n}.max_abs_dp"), dp, tol));
        report.check(Check::at_most(format!("point{n}.max_abs_dq"), dq, tol));
    }
    w.flush()?;
    Ok(report)
}
