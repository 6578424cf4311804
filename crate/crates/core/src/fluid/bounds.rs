use crate::model::{ValidatedModel, E_INV};

/// Bounds `(l, u)` on `‖z(t)‖₁` for every `t ≥ 0` along the solution from `z0`:
/// `u = max{‖z0‖₁, (‖Λ‖₁ - e^{-1}) / min p}`, `l = min{‖z0‖₁, (‖Λ‖₁ - e^{-1}) / max p}`.
pub fn fms_norm_bounds(z0: &[f64], model: &ValidatedModel) -> (f64, f64) {
    let norm: f64 = z0.iter().sum();
    let excess = model.lambda_norm() - E_INV;
    let upper = norm.max(excess / model.p_min());
    let lower = norm.min(excess / model.p_max());
    (lower, upper)
}

/// Coordinatewise bounds `(l_i, u_i)` derived from the norm bounds.
/// The lower bound is identically zero when `z0 = 0`.
pub fn fms_coord_bounds(z0: &[f64], model: &ValidatedModel) -> (Vec<f64>, Vec<f64>) {
    let (l, u) = fms_norm_bounds(z0, model);
    let upper = z0
        .iter()
        .zip(model.lambda())
        .zip(model.p())
        .map(|((&z, &lam), &p)| z.max(lam / (E_INV / u + p)))
        .collect();
    let lower = if z0.iter().all(|&z| z == 0.0) {
        vec![0.0; z0.len()]
    } else {
        z0.iter()
            .zip(model.lambda())
            .zip(model.p())
            .map(|((&z, &lam), &p)| z.min(lam / (E_INV / l + p)))
            .collect()
    };
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::equilibrium;
    use crate::model::ModelParams;
    use approx::assert_abs_diff_eq;

    #[test]
    fn norm_bound_examples() {
        let m = ModelParams::poisson(vec![1.0], vec![0.5]).validate().unwrap();
        let (l, u) = fms_norm_bounds(&[0.0], &m);
        assert_eq!(l, 0.0);
        assert_abs_diff_eq!(u, 1.264_241, epsilon = 1e-6);

        let m = ModelParams::poisson(vec![0.5, 0.5], vec![0.5, 1.0]).validate().unwrap();
        let (l, u) = fms_norm_bounds(&[4.0, 6.0], &m);
        assert_eq!(u, 10.0);
        assert_abs_diff_eq!(l, 0.632_121, epsilon = 1e-6);
    }

    #[test]
    fn coord_bound_examples() {
        let m = ModelParams::poisson(vec![1.0], vec![0.5]).validate().unwrap();
        let (_, u) = fms_coord_bounds(&[2.0], &m);
        assert_eq!(u, vec![2.0]);
        let (l, _) = fms_coord_bounds(&[0.0], &m);
        assert_eq!(l, vec![0.0]);
    }

    #[test]
    fn equilibrium_inside_bounds() {
        let m = ModelParams::poisson(vec![0.5, 0.7, 0.1], vec![0.3, 1.0, 0.6]).validate().unwrap();
        let ze = equilibrium(&m).unwrap().z_e;
        let norm: f64 = ze.iter().sum();
        let (l, u) = fms_norm_bounds(&ze, &m);
        assert!(l <= norm && norm <= u);
        let (li, ui) = fms_coord_bounds(&ze, &m);
        for i in 0..3 {
            assert!(li[i] <= ze[i] && ze[i] <= ui[i]);
        }
    }
}
