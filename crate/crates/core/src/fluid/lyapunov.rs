use crate::model::{ValidatedModel, E_INV};

/// `V(z) = Σ (z_i - z_e,i)² / z_e,i`.
pub fn lyapunov_v(z: &[f64], z_e: &[f64]) -> f64 {
    z.iter().zip(z_e).map(|(&zi, &ei)| (zi - ei).powi(2) / ei).sum()
}

/// `u_K(y) = Σ y_i² / z_e,i - (Σ y_i)² / Σ z_e,i`; nonnegative by Cauchy–Schwarz.
pub fn quadratic_form_uk(y: &[f64], z_e: &[f64]) -> f64 {
    let weighted: f64 = y.iter().zip(z_e).map(|(&yi, &ei)| yi * yi / ei).sum();
    let sum_y: f64 = y.iter().sum();
    let sum_e: f64 = z_e.iter().sum();
    weighted - sum_y * sum_y / sum_e
}

/// Derivative of `V` along the fluid vector field,
/// `-Σ 2 p_i y_i² / z_e,i - (2 e^{-1} / ‖z‖₁) u_K(y)` with `y = z - z_e`.
pub fn lyapunov_vdot(z: &[f64], z_e: &[f64], model: &ValidatedModel) -> f64 {
    let y: Vec<f64> = z.iter().zip(z_e).map(|(&zi, &ei)| zi - ei).collect();
    let damping: f64 = y
        .iter()
        .zip(z_e)
        .zip(model.p())
        .map(|((&yi, &ei), &p)| 2.0 * p * yi * yi / ei)
        .sum();
    let norm: f64 = z.iter().sum();
    -damping - 2.0 * E_INV / norm * quadratic_form_uk(&y, z_e)
}
