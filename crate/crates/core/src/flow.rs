//! The deterministic outer flow `dξ/dt = f(ξ)` and its limit map π.
//!
//! Integration uses the Dormand–Prince 5(4) pair with its fourth-order
//! continuous extension for output at arbitrary times.

use nalgebra::{DMatrix, DVector};

use crate::diff;
use crate::error::{Error, Result};
use crate::model::SdeSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            initial_step: None,
            min_step: 1e-14,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

/// Solution sampled on a requested time grid.
#[derive(Debug, Clone)]
pub struct FlowPath {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub step_count: usize,
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub endpoint: DVector<f64>,
    pub integration_time: f64,
    /// `‖f(endpoint)‖_∞`.
    pub residual: f64,
    pub step_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiOptions {
    pub pi_tol: f64,
    pub t_max: f64,
    pub flow: FlowOptions,
}

impl Default for PiOptions {
    fn default() -> Self {
        Self {
            pi_tol: 1e-10,
            t_max: 1e4,
            flow: FlowOptions {
                rtol: 1e-11,
                atol: 1e-13,
                ..FlowOptions::default()
            },
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step together with what is needed to interpolate inside it.
struct Accepted {
    t0: f64,
    h: f64,
    y0: Vec<f64>,
    y1: Vec<f64>,
    cont: [Vec<f64>; 3],
}

impl Accepted {
    fn interpolate(&self, t: f64, out: &mut [f64]) {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        for i in 0..out.len() {
            let r2 = self.y1[i] - self.y0[i];
            out[i] = self.y0[i]
                + theta * (r2 + theta1 * (self.cont[0][i] + theta * (self.cont[1][i] + theta1 * self.cont[2][i])));
        }
    }
}

struct Stepper<'a> {
    system: &'a SdeSystem,
    opts: FlowOptions,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(system: &'a SdeSystem, opts: FlowOptions) -> Self {
        let d = system.dim();
        Self {
            system,
            opts,
            k: std::array::from_fn(|_| vec![0.0; d]),
            tmp: vec![0.0; d],
            y_new: vec![0.0; d],
        }
    }

    fn stage(&mut self, y: &[f64], h: f64, coeffs: &[(usize, f64)], into: usize) -> Result<()> {
        for i in 0..y.len() {
            self.tmp[i] = y[i] + h * coeffs.iter().map(|&(s, a)| a * self.k[s][i]).sum::<f64>();
        }
        let (tmp, k) = (&self.tmp, &mut self.k[into]);
        self.system.outer_into(tmp, k)
    }

    fn initial_step(&self, y: &[f64]) -> f64 {
        if let Some(h) = self.opts.initial_step {
            return h;
        }
        let scale = |i: usize| self.opts.atol + self.opts.rtol * y[i].abs();
        let d0 = rms(y.iter().enumerate().map(|(i, v)| v / scale(i)));
        let d1 = rms(self.k[0].iter().enumerate().map(|(i, v)| v / scale(i)));
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(self.opts.max_step)
    }

    /// Attempts a step of size `h` from `y` (with `k[0] = f(y)` already set).
    /// Returns the scaled error norm; on acceptance the caller swaps in `y_new` and `k[6]`.
    fn attempt(&mut self, y: &[f64], h: f64) -> Result<f64> {
        self.stage(y, h, &[(0, A21)], 1)?;
        self.stage(y, h, &[(0, A31), (1, A32)], 2)?;
        self.stage(y, h, &[(0, A41), (1, A42), (2, A43)], 3)?;
        self.stage(y, h, &[(0, A51), (1, A52), (2, A53), (3, A54)], 4)?;
        self.stage(y, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], 5)?;
        for i in 0..y.len() {
            self.y_new[i] = y[i]
                + h * (A71 * self.k[0][i]
                    + A73 * self.k[2][i]
                    + A74 * self.k[3][i]
                    + A75 * self.k[4][i]
                    + A76 * self.k[5][i]);
        }
        let (y_new, k6) = (&self.y_new, &mut self.k[6]);
        self.system.outer_into(y_new, k6)?;
        let k = &self.k;
        let err = rms((0..y.len()).map(|i| {
            let e = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            e / (self.opts.atol + self.opts.rtol * y[i].abs().max(self.y_new[i].abs()))
        }));
        Ok(err)
    }

    fn dense(&self, t0: f64, h: f64, y0: &[f64]) -> Accepted {
        let k = &self.k;
        let n = y0.len();
        let mut c3 = vec![0.0; n];
        let mut c4 = vec![0.0; n];
        let mut c5 = vec![0.0; n];
        for i in 0..n {
            let r2 = self.y_new[i] - y0[i];
            c3[i] = h * k[0][i] - r2;
            c4[i] = r2 - h * k[6][i] - c3[i];
            c5[i] = h
                * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
        }
        Accepted {
            t0,
            h,
            y0: y0.to_vec(),
            y1: self.y_new.clone(),
            cont: [c3, c4, c5],
        }
    }
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Drives the adaptive integrator, handing every accepted step to `visit`.
/// `visit` returns `false` to stop early.
fn drive(
    system: &SdeSystem,
    x0: &DVector<f64>,
    t_end: f64,
    opts: FlowOptions,
    mut visit: impl FnMut(&Accepted, &[f64]) -> Result<bool>,
) -> Result<(Vec<f64>, f64, usize)> {
    if x0.len() != system.dim() {
        return Err(Error::Shape(format!(
            "initial state has length {}, system dimension is {}",
            x0.len(),
            system.dim()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::eval("initial state", x0.as_slice()));
    }
    let mut st = Stepper::new(system, opts);
    let mut y = x0.as_slice().to_vec();
    system.outer_into(&y, &mut st.k[0])?;
    let mut t = 0.0;
    let mut h = st.initial_step(&y).min(t_end.max(opts.min_step));
    let mut steps = 0usize;
    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::Stiffness { t, step: h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let err = st.attempt(&y, h)?;
        if err <= 1.0 {
            let acc = st.dense(t, h, &y);
            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut st.y_new);
            st.k.swap(0, 6);
            steps += 1;
            if !visit(&acc, &st.k[0])? {
                break;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(opts.max_step);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < opts.min_step * (1.0 + t.abs()) {
                return Err(Error::Stiffness { t, step: h });
            }
        }
    }
    Ok((y, t, steps))
}

/// Integrates the outer flow from `x0`, reporting the state at each requested time.
///
/// `times` must be non-decreasing and non-negative.
pub fn integrate_outer(
    system: &SdeSystem,
    x0: &DVector<f64>,
    times: &[f64],
    opts: &FlowOptions,
) -> Result<FlowPath> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Config("output times must be non-negative and non-decreasing".into()));
    }
    let d = system.dim();
    let mut states = Vec::with_capacity(times.len());
    let mut next = 0;
    while next < times.len() && times[next] == 0.0 {
        states.push(x0.clone());
        next += 1;
    }
    let t_end = times.last().copied().unwrap_or(0.0);
    let mut buf = vec![0.0; d];
    let (last, _, steps) = drive(system, x0, t_end, *opts, |acc, _| {
        let t1 = acc.t0 + acc.h;
        while next < times.len() && times[next] <= t1 {
            acc.interpolate(times[next], &mut buf);
            states.push(DVector::from_column_slice(&buf));
            next += 1;
        }
        Ok(true)
    })?;
    // rounding can leave t_end just past the final accepted step
    while states.len() < times.len() {
        states.push(DVector::from_column_slice(&last));
    }
    Ok(FlowPath {
        times: times.to_vec(),
        states,
        step_count: steps,
    })
}

/// The endpoint π(x0) of the outer flow.
///
/// Stops once `‖f‖_∞ ≤ pi_tol` and the last step moved the state by at most `pi_tol`.
pub fn pi_map(system: &SdeSystem, x0: &DVector<f64>, opts: &PiOptions) -> Result<FlowResult> {
    let f0 = system.outer(x0)?;
    if f0.amax() == 0.0 {
        return Ok(FlowResult {
            endpoint: x0.clone(),
            integration_time: 0.0,
            residual: 0.0,
            step_count: 0,
        });
    }
    let mut converged = false;
    let mut residual = f0.amax();
    let (y, t, steps) = drive(system, x0, opts.t_max, opts.flow, |acc, f_new| {
        residual = f_new.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let moved = acc
            .y0
            .iter()
            .zip(&acc.y1)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        converged = residual <= opts.pi_tol && moved <= opts.pi_tol;
        Ok(!converged)
    })?;
    if !converged {
        return Err(Error::NoConvergence {
            t_max: opts.t_max,
            residual,
        });
    }
    Ok(FlowResult {
        endpoint: DVector::from_vec(y),
        integration_time: t,
        residual,
        step_count: steps,
    })
}

/// Finite-difference derivatives of π at `z`: `P ≈ ∂π/∂x` and `Q_i ≈ ∂²π_i/∂x²`.
pub fn pi_jet_fd(
    system: &SdeSystem,
    z: &DVector<f64>,
    fd_step: f64,
    opts: &PiOptions,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    if !(fd_step > 0.0) {
        return Err(Error::Config(format!("finite-difference step must be > 0, got {fd_step}")));
    }
    let pi = |x: &DVector<f64>| pi_map(system, x, opts).map(|r| r.endpoint);
    let p = diff::jacobian(pi, z, fd_step)?;
    let q = diff::hessians(pi, z, fd_step)?;
    Ok((p, q))
}
