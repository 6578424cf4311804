use crate::model::{ValidatedModel, E_INV};

/// One-class solution `z0 e^{-pt} + ((λ - e^{-1}) / p)(1 - e^{-pt})`.
pub fn closed_form_1d(z0: f64, lambda: f64, p: f64, t: f64) -> f64 {
    let decay = (-p * t).exp();
    z0 * decay + (lambda - E_INV) / p * (1.0 - decay)
}

/// Solution from the origin when every class has the same damping `a1`:
/// the direction stays `Λ / ‖Λ‖₁` and the norm solves a scalar linear ODE.
pub fn closed_form_equal_a(lambda: &[f64], a1: f64, t: f64) -> Vec<f64> {
    let norm: f64 = lambda.iter().sum();
    let excess = norm - E_INV;
    let radial = if a1 == 0.0 {
        excess * t
    } else {
        // -expm1 keeps accuracy for small a1 t
        excess / a1 * -(-a1 * t).exp_m1()
    };
    lambda.iter().map(|&l| l / norm * radial).collect()
}

/// Right derivative at `t = 0` of the solution started from the origin,
/// `(1 - e^{-1} / ‖Λ‖₁) Λ`.
pub fn derivative_at_zero(model: &ValidatedModel) -> Vec<f64> {
    let factor = 1.0 - E_INV / model.lambda_norm();
    model.lambda().iter().map(|&l| factor * l).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_dimensional() {
        assert_eq!(closed_form_1d(3.0, 1.0, 0.5, 0.0), 3.0);
        assert_abs_diff_eq!(closed_form_1d(0.0, 1.0, 0.5, 1e4), 1.264_241, epsilon = 1e-6);
        assert_abs_diff_eq!(closed_form_1d(2.0, 1.0, 1.0, 1.0), 1.135_335, epsilon = 1e-6);
    }

    #[test]
    fn equal_damping() {
        assert_eq!(closed_form_equal_a(&[0.6, 0.4], 1.0, 0.0), vec![0.0, 0.0]);
        let z = closed_form_equal_a(&[0.6, 0.4], 0.0, 1.0);
        assert_abs_diff_eq!(z[0], 0.6 * (1.0 - E_INV), epsilon = 1e-15);
        assert_abs_diff_eq!(z[1], 0.252_848, epsilon = 1e-6);
        let z = closed_form_equal_a(&[0.6, 0.4], 1.0, 50.0);
        assert_abs_diff_eq!(z[0], 0.379_272, epsilon = 1e-6);
        assert_abs_diff_eq!(z[1], 0.252_848, epsilon = 1e-6);
    }

    #[test]
    fn derivative_formula() {
        let m = ModelParams::poisson(vec![0.6, 0.4], vec![1.0, 1.0]).validate().unwrap();
        let d = derivative_at_zero(&m);
        assert_abs_diff_eq!(d[0], 0.379_272, epsilon = 1e-6);
        assert_abs_diff_eq!(d[1], 0.252_848, epsilon = 1e-6);

        let big = ModelParams::poisson(vec![600.0, 400.0], vec![1.0, 1.0]).validate().unwrap();
        let d = derivative_at_zero(&big);
        assert!((d[0] / 600.0 - 1.0).abs() < 1e-3);
    }
}
