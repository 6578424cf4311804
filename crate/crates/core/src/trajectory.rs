use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vector-valued function of time sampled on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidTrajectory {
    pub grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl FluidTrajectory {
    pub fn new(grid: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "{} grid points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::GridMismatch("grid must be strictly increasing".into()));
        }
        Ok(FluidTrajectory { grid, values })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.values.last().map(Vec::as_slice)
    }

    /// `‖z(t)‖₁` at every grid point.
    pub fn norms(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.iter().sum()).collect()
    }

    /// Nonnegative everywhere and nonzero for every t > 0.
    pub fn check_positive_off_zero(&self) -> bool {
        self.grid.iter().zip(&self.values).all(|(&t, v)| {
            v.iter().all(|&x| x >= 0.0) && (t == 0.0 || v.iter().any(|&x| x > 0.0))
        })
    }

    /// Keeps every `stride`-th sample, starting from the first.
    pub fn subsample(&self, stride: usize) -> FluidTrajectory {
        let stride = stride.max(1);
        FluidTrajectory {
            grid: self.grid.iter().copied().step_by(stride).collect(),
            values: self.values.iter().cloned().step_by(stride).collect(),
        }
    }

    /// CSV with columns `t, z_1..z_K`.
    pub fn to_csv(&self) -> String {
        let k = self.classes();
        let mut out = String::from("t");
        for i in 1..=k {
            out.push_str(&format!(",z_{i}"));
        }
        out.push('\n');
        for (t, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&t.to_string());
            for x in v {
                out.push(',');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty trajectory csv".into()))?;
        let k = header.split(',').count().saturating_sub(1);
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let fields = parse_floats(line)?;
            if fields.len() != k + 1 {
                return Err(Error::Parse(format!("expected {} columns in {line:?}", k + 1)));
            }
            grid.push(fields[0]);
            values.push(fields[1..].to_vec());
        }
        FluidTrajectory::new(grid, values)
    }
}

pub(crate) fn parse_floats(line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number {f:?}: {e}")))
        })
        .collect()
}

/// `max_i |a_i - b_i|`.
pub fn sup_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Uniform grid `0, step, 2 step, …` up to `t_max`; an endpoint within rounding
/// of a multiple of `step` is included.
pub fn uniform_grid(t_max: f64, step: f64) -> Vec<f64> {
    let n = (t_max / step + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}
