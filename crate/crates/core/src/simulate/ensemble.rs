use std::io::Write;

use crate::error::{Error, Result};

/// Header line that versions every CSV file written by this crate.
pub const CSV_HEADER_COMMENT: &str = "# slowmani-csv v1";

/// Replicate paths on a shared time grid, stored replicate-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    times: Vec<f64>,
    dim: usize,
    data: Vec<f64>,
    pub seed_root: u64,
    pub model_tag: String,
}

impl TrajectoryEnsemble {
    /// `paths[r]` holds `times.len() × dim` values for replicate `r`.
    pub fn from_paths(times: Vec<f64>, dim: usize, paths: Vec<Vec<f64>>, seed_root: u64, model_tag: impl Into<String>) -> Result<Self> {
        let per = times.len() * dim;
        if paths.iter().any(|p| p.len() != per) {
            return Err(Error::Shape(format!("every path must hold {per} values")));
        }
        Ok(Self {
            times,
            dim,
            data: paths.concat(),
            seed_root,
            model_tag: model_tag.into(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rep(&self) -> usize {
        if self.times.is_empty() || self.dim == 0 {
            0
        } else {
            self.data.len() / (self.times.len() * self.dim)
        }
    }

    pub fn state(&self, rep: usize, t: usize) -> &[f64] {
        let off = (rep * self.times.len() + t) * self.dim;
        &self.data[off..off + self.dim]
    }

    pub fn path(&self, rep: usize) -> impl Iterator<Item = &[f64]> {
        (0..self.times.len()).map(move |t| self.state(rep, t))
    }

    /// Applies `f` to every state, producing an ensemble of dimension `out_dim`.
    pub fn map_states(&self, out_dim: usize, mut f: impl FnMut(usize, &[f64]) -> Result<Vec<f64>>) -> Result<Self> {
        let mut data = Vec::with_capacity(self.n_rep() * self.times.len() * out_dim);
        for rep in 0..self.n_rep() {
            for t in 0..self.times.len() {
                let v = f(t, self.state(rep, t))?;
                if v.len() != out_dim {
                    return Err(Error::Shape(format!("mapped state has length {}, expected {out_dim}", v.len())));
                }
                data.extend(v);
            }
        }
        Ok(Self {
            times: self.times.clone(),
            dim: out_dim,
            data,
            seed_root: self.seed_root,
            model_tag: self.model_tag.clone(),
        })
    }

    /// Same paths with the time axis multiplied by `factor`.
    pub fn rescale_time(mut self, factor: f64) -> Self {
        for t in &mut self.times {
            *t *= factor;
        }
        self
    }

    pub fn moments(&self) -> MomentTable {
        let n = self.n_rep();
        let nt = self.times.len();
        let d = self.dim;
        let mut table = MomentTable {
            times: self.times.clone(),
            dim: d,
            n_rep: n,
            mean: vec![0.0; nt * d],
            var: vec![0.0; nt * d],
            se_mean: vec![0.0; nt * d],
            se_var: vec![0.0; nt * d],
        };
        if n == 0 {
            return table;
        }
        let nf = n as f64;
        for t in 0..nt {
            for i in 0..d {
                let vals = (0..n).map(|r| self.state(r, t)[i]);
                let mean = vals.clone().sum::<f64>() / nf;
                let (m2, m4) = vals.fold((0.0, 0.0), |(m2, m4), v| {
                    let c = (v - mean) * (v - mean);
                    (m2 + c, m4 + c * c)
                });
                let var = if n > 1 { m2 / (nf - 1.0) } else { 0.0 };
                let central4 = m4 / nf;
                let pop_var = m2 / nf;
                let k = t * d + i;
                table.mean[k] = mean;
                table.var[k] = var;
                table.se_mean[k] = (var / nf).sqrt();
                table.se_var[k] = ((central4 - pop_var * pop_var).max(0.0) / nf).sqrt();
            }
        }
        table
    }

    /// CSV with columns `time, replicate, x1..xd`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out)?;
        let mut header = vec!["time".to_string(), "replicate".to_string()];
        header.extend((1..=self.dim).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for rep in 0..self.n_rep() {
            for (t, state) in self.path(rep).enumerate() {
                let mut row = vec![self.times[t].to_string(), rep.to_string()];
                row.extend(state.iter().map(f64::to_string));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes the version comment and returns a CSV writer positioned after it.
pub fn csv_writer<W: Write>(mut out: W) -> Result<csv::Writer<W>> {
    writeln!(out, "{CSV_HEADER_COMMENT}")?;
    Ok(csv::Writer::from_writer(out))
}

/// Per-time sample moments of every coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub times: Vec<f64>,
    pub dim: usize,
    pub n_rep: usize,
    mean: Vec<f64>,
    var: Vec<f64>,
    se_mean: Vec<f64>,
    se_var: Vec<f64>,
}

impl MomentTable {
    pub fn mean(&self, t: usize, i: usize) -> f64 {
        self.mean[t * self.dim + i]
    }

    /// Unbiased sample variance.
    pub fn var(&self, t: usize, i: usize) -> f64 {
        self.var[t * self.dim + i]
    }

    /// Standard error of the mean.
    pub fn se_mean(&self, t: usize, i: usize) -> f64 {
        self.se_mean[t * self.dim + i]
    }

    /// Standard error of the variance, `√((m₄ − σ⁴)/n)`.
    pub fn se_var(&self, t: usize, i: usize) -> f64 {
        self.se_var[t * self.dim + i]
    }

    /// Least-squares slope through the origin of `var_i(t) − var_i(0)` against `t − t₀`.
    pub fn variance_growth_slope(&self, i: usize) -> f64 {
        let (t0, v0) = (self.times[0], self.var(0, i));
        let (sxy, sxx) = self.times.iter().enumerate().skip(1).fold((0.0, 0.0), |(sxy, sxx), (t, &time)| {
            let dt = time - t0;
            (sxy + dt * (self.var(t, i) - v0), sxx + dt * dt)
        });
        if sxx > 0.0 {
            sxy / sxx
        } else {
            0.0
        }
    }

    /// CSV with columns `time, mean_i.., var_i.., se_i..`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out)?;
        let mut header = vec!["time".to_string()];
        for prefix in ["mean", "var", "se"] {
            header.extend((1..=self.dim).map(|i| format!("{prefix}_{i}")));
        }
        w.write_record(&header)?;
        for (t, time) in self.times.iter().enumerate() {
            let mut row = vec![time.to_string()];
            for col in [&self.mean, &self.var, &self.se_mean] {
                row.extend((0..self.dim).map(|i| col[t * self.dim + i].to_string()));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_two_paths() {
        let e = TrajectoryEnsemble::from_paths(vec![0.0, 1.0], 1, vec![vec![0.0, 1.0], vec![0.0, 3.0]], 1, "t").unwrap();
        let m = e.moments();
        assert_eq!(m.mean(1, 0), 2.0);
        assert_eq!(m.var(1, 0), 2.0);
        assert_eq!(m.var(0, 0), 0.0);
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# slowmani-csv v1\ntime,replicate,x1\n0,0,0\n"));
    }
}
