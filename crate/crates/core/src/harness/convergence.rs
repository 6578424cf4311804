use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::integrate_fms;
use crate::model::{IntegerState, ValidatedModel};
use crate::rng::RngPlan;
use crate::simulator::{run_path_with, scaled_path, PathOptions, RenegingSampler};
use crate::trajectory::{parse_floats, sup_norm_diff, uniform_grid, FluidTrajectory};

/// Replication statistics of the sup-distance between scaled paths and the fluid solution at one R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderStats {
    pub r: f64,
    pub reps: usize,
    pub mean_sup_dist: f64,
    pub max_sup_dist: f64,
    pub std_sup_dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub model: String,
    pub z0: Vec<f64>,
    pub t_max: f64,
    pub grid_step: f64,
    pub seed: u64,
    pub ladder: Vec<LadderStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceParams {
    pub z0: Vec<f64>,
    pub r_ladder: Vec<f64>,
    pub reps: usize,
    pub t_max: f64,
    pub grid_step: f64,
    pub seed: u64,
}

/// Steps of the fluid integrator per grid step.
const FLUID_SUBSTEPS: usize = 10;

/// For every R in the ladder, simulates `reps` paths from `round(R z0)` for
/// `⌈R t_max⌉` slots and measures `sup_t max_i |W̄_i(t) - z_i(t)|` on the grid.
pub fn convergence_experiment(
    model: &ValidatedModel,
    params: &ConvergenceParams,
) -> Result<ConvergenceReport> {
    if params.r_ladder.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("R ladder must be strictly increasing".into()));
    }
    if params.reps == 0 || !(params.grid_step > 0.0) || !(params.t_max > 0.0) {
        return Err(Error::InvalidArgument("need reps >= 1, grid_step > 0 and t_max > 0".into()));
    }
    let grid = uniform_grid(params.t_max, params.grid_step);
    let t_end = *grid.last().unwrap_or(&0.0);
    let fluid = integrate_fms(
        &params.z0,
        model,
        t_end,
        params.grid_step / FLUID_SUBSTEPS as f64,
    )?
    .subsample(FLUID_SUBSTEPS);
    if fluid.len() != grid.len() {
        return Err(Error::GridMismatch("fluid grid does not align with the report grid".into()));
    }

    let plan = RngPlan::new(params.seed);
    let mut ladder = Vec::with_capacity(params.r_ladder.len());
    for (level, &r) in params.r_ladder.iter().enumerate() {
        let horizon = (r * params.t_max).ceil() as u64;
        let initial = IntegerState::from_fluid(&params.z0, r);
        let run = |rep: usize| -> Result<f64> {
            let opts = PathOptions {
                plan,
                replication: ((level as u64) << 32) | rep as u64,
                reneging: RenegingSampler::Binomial,
            };
            let path = run_path_with(model, r, horizon, &initial, opts)?;
            Ok(sup_distance(&scaled_path(&path, &grid)?, &fluid))
        };
        let dists = collect_ordered(params.reps, run)?;
        ladder.push(summarize(r, &dists));
    }
    Ok(ConvergenceReport {
        model: model.fingerprint(),
        z0: params.z0.clone(),
        t_max: params.t_max,
        grid_step: params.grid_step,
        seed: params.seed,
        ladder,
    })
}

/// Runs `f(0..n)`, in parallel when available, returning results in index order.
pub(crate) fn collect_ordered<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

pub fn sup_distance(a: &FluidTrajectory, b: &FluidTrajectory) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| sup_norm_diff(x, y))
        .fold(0.0, f64::max)
}

fn summarize(r: f64, dists: &[f64]) -> LadderStats {
    let n = dists.len();
    let mean = dists.iter().sum::<f64>() / n as f64;
    let max = dists.iter().copied().fold(0.0, f64::max);
    let std = if n > 1 {
        (dists.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    LadderStats { r, reps: n, mean_sup_dist: mean, max_sup_dist: max, std_sup_dist: std }
}

pub const CONVERGENCE_HEADER: &str = "R,reps,mean_sup_dist,max_sup_dist,std_sup_dist";

impl ConvergenceReport {
    /// CSV with columns `R, reps, mean_sup_dist, max_sup_dist, std_sup_dist`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CONVERGENCE_HEADER}\n");
        for s in &self.ladder {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.r, s.reps, s.mean_sup_dist, s.max_sup_dist, s.std_sup_dist
            ));
        }
        out
    }

    /// Parses the ladder rows written by [`ConvergenceReport::to_csv`].
    pub fn ladder_from_csv(text: &str) -> Result<Vec<LadderStats>> {
        let mut lines = text.lines();
        if lines.next() != Some(CONVERGENCE_HEADER) {
            return Err(Error::Parse("unexpected convergence csv header".into()));
        }
        lines
            .filter(|l| !l.is_empty())
            .map(|line| {
                let f = parse_floats(line)?;
                if f.len() != 5 {
                    return Err(Error::Parse(format!("expected 5 columns in {line:?}")));
                }
                Ok(LadderStats {
                    r: f[0],
                    reps: f[1] as usize,
                    mean_sup_dist: f[2],
                    max_sup_dist: f[3],
                    std_sup_dist: f[4],
                })
            })
            .collect()
    }
}
