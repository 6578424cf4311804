use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ValidatedModel, E_INV};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub z_e: Vec<f64>,
    /// Root `x` of `Σ p_i Λ_i / (x + p_i) = ‖Λ‖₁ - e^{-1}`; equals `e^{-1} / ‖z_e‖₁`.
    pub x_root: f64,
    /// Sup-norm of `Λ - p * z_e - e^{-1} z_e / ‖z_e‖₁`.
    pub residual: f64,
}

const X_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-9;

/// Left side of the scalar equilibrium equation, `Σ_i p_i Λ_i / (x + p_i)`.
pub fn equilibrium_lhs(model: &ValidatedModel, x: f64) -> f64 {
    model
        .lambda()
        .iter()
        .zip(model.p())
        .map(|(&l, &p)| p * l / (x + p))
        .sum()
}

/// The unique equilibrium `z_e,i = Λ_i / (x + p_i)`, with `x` found by bisection.
pub fn equilibrium(model: &ValidatedModel) -> Result<EquilibriumResult> {
    let target = model.lambda_norm() - E_INV;
    let f = |x: f64| equilibrium_lhs(model, x) - target;

    // f(0) = e^{-1} > 0 and f decreases to -target < 0
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 2f64.powi(60) {
            return Err(Error::NumericFailure("no bracket for the equilibrium root".into()));
        }
    }
    while hi - lo > X_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let z_e: Vec<f64> = model
        .lambda()
        .iter()
        .zip(model.p())
        .map(|(&l, &p)| l / (x + p))
        .collect();
    let residual = equilibrium_residual(model, &z_e);
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::NumericFailure(format!("equilibrium residual {residual:e} too large")));
    }
    Ok(EquilibriumResult { z_e, x_root: x, residual })
}

fn equilibrium_residual(model: &ValidatedModel, z: &[f64]) -> f64 {
    let norm: f64 = z.iter().sum();
    z.iter()
        .zip(model.lambda())
        .zip(model.p())
        .map(|((&zi, &l), &p)| (l - p * zi - E_INV * zi / norm).abs())
        .fold(0.0, f64::max)
}
