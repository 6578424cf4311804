//! Experiments confronting the simulated chain with the fluid model.

mod convergence;
mod residual;
mod stability;
mod validate;

pub use convergence::{
    convergence_experiment, sup_distance, ConvergenceParams, ConvergenceReport, LadderStats,
    CONVERGENCE_HEADER,
};
pub use residual::{residual_decomposition, ResidualSeries};
pub use stability::{stability_experiment, StabilityRow, StabilityTable, V_SLACK};
pub use validate::{enumerate_success_probabilities, format_suites, run_validation, SuiteResult};

use crate::error::{Error, Result};
use crate::trajectory::FluidTrajectory;

/// Per path, the minimum of `‖W̄(t)‖₁` over grid points in `[delta, big_delta]`.
pub fn positivity_probe(paths: &[FluidTrajectory], delta: f64, big_delta: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta < big_delta) {
        return Err(Error::InvalidArgument(format!(
            "positivity window needs 0 < delta < Delta, got [{delta}, {big_delta}]"
        )));
    }
    Ok(paths
        .iter()
        .map(|p| {
            p.grid
                .iter()
                .zip(&p.values)
                .filter(|(&t, _)| t >= delta && t <= big_delta)
                .map(|(_, v)| v.iter().sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

/// Empirical `q`-quantile (nearest rank) of `xs`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}
