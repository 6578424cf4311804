//! Deterministic fluid model `z' = Λ - p * z - e^{-1} m(z)` and its analysis.

mod bounds;
mod closed_form;
mod equilibrium;
mod lyapunov;
mod picard;

pub use bounds::{fms_coord_bounds, fms_norm_bounds};
pub use closed_form::{closed_form_1d, closed_form_equal_a, derivative_at_zero};
pub use equilibrium::{equilibrium, equilibrium_lhs, EquilibriumResult};
pub use lyapunov::{lyapunov_v, lyapunov_vdot, quadratic_form_uk};
pub use picard::{epsilon_gap_bound, picard_solve, EpsilonGap, PicardConfig, PicardOutcome};

pub use crate::trajectory::FluidTrajectory;

use crate::error::{Error, Result};
use crate::model::{drift_direction_m, ValidatedModel, E_INV};

/// Right-hand side `Λ - p * z - e^{-1} m(z)`, with `m(0) = Λ / ‖Λ‖₁`.
pub fn rhs(z: &[f64], model: &ValidatedModel) -> Vec<f64> {
    let mut out = vec![0.0; z.len()];
    rhs_into(z, model, &mut out);
    out
}

fn rhs_into(z: &[f64], model: &ValidatedModel, out: &mut [f64]) {
    let m = drift_direction_m(z, model.lambda());
    for i in 0..z.len() {
        out[i] = model.lambda()[i] - model.p()[i] * z[i] - E_INV * m[i];
    }
}

/// Classical fixed-step RK4 on [`rhs`] from `z0` over `[0, t_max]`.
///
/// Round-off can push a coordinate marginally below zero; such values are
/// clamped, but a clamp larger than `dt²` is reported as [`Error::StepTooLarge`],
/// as is a trajectory that returns to the origin.
pub fn integrate_fms(
    z0: &[f64],
    model: &ValidatedModel,
    t_max: f64,
    dt: f64,
) -> Result<FluidTrajectory> {
    let k = model.classes();
    if z0.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "z0 has {} coordinates, model has {k} classes",
            z0.len()
        )));
    }
    if z0.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument("z0 must be nonnegative and finite".into()));
    }
    if !(dt > 0.0) || !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t_max >= 0, got dt={dt}, t_max={t_max}")));
    }
    let steps = ((t_max / dt) - 1e-9).ceil().max(0.0) as usize;
    let mut grid = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    grid.push(0.0);
    values.push(z0.to_vec());

    let mut z = z0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]);
    let mut stage = vec![0.0; k];
    let clamp_limit = dt * dt;
    for n in 0..steps {
        let t = n as f64 * dt;
        let t_next = if n + 1 == steps { t_max } else { (n + 1) as f64 * dt };
        let h = t_next - t;

        rhs_into(&z, model, &mut k1);
        for i in 0..k {
            stage[i] = (z[i] + 0.5 * h * k1[i]).max(0.0);
        }
        rhs_into(&stage, model, &mut k2);
        for i in 0..k {
            stage[i] = (z[i] + 0.5 * h * k2[i]).max(0.0);
        }
        rhs_into(&stage, model, &mut k3);
        for i in 0..k {
            stage[i] = (z[i] + h * k3[i]).max(0.0);
        }
        rhs_into(&stage, model, &mut k4);
        for i in 0..k {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if z[i] < 0.0 {
                if -z[i] > clamp_limit {
                    return Err(Error::StepTooLarge(format!(
                        "coordinate {i} reached {} at t={t_next}; reduce dt",
                        z[i]
                    )));
                }
                z[i] = 0.0;
            }
        }
        if z.iter().all(|&x| x == 0.0) {
            return Err(Error::StepTooLarge(format!("trajectory hit the origin at t={t_next}")));
        }
        grid.push(t_next);
        values.push(z.clone());
    }
    FluidTrajectory::new(grid, values)
}
