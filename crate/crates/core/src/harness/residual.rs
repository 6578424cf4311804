use crate::error::{Error, Result};
use crate::model::{drift_direction_m, success_probabilities, ValidatedModel, E_INV};
use crate::simulator::{martingale_residual, slot_index, SimPath};
use crate::trajectory::FluidTrajectory;

/// Gap `G(t)` between a scaled path and the fluid integral equation, split into
/// the scaled martingale and three deterministic error terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub grid: Vec<f64>,
    pub total: Vec<Vec<f64>>,
    pub martingale: Vec<Vec<f64>>,
    /// Floor gap `(⌊Rt⌋/R - t) Λ`.
    pub floor_gap: Vec<Vec<f64>>,
    /// Throughput gap between `e^{-1}` and `h(R ‖W̄‖₁)`.
    pub throughput_gap: Vec<Vec<f64>>,
    /// Impatience over the fractional last slot `[⌊Rt⌋/R, t]`.
    pub fractional_slot: Vec<Vec<f64>>,
}

/// Computes
/// `G(t) = W̄(t) - W̄(0) - tΛ + e^{-1} ∫_0^t m(W̄) + p * ∫_0^t W̄`
/// and its four components on the grid of `fms`. Integrals of the
/// piecewise-constant scaled path are evaluated exactly.
pub fn residual_decomposition(
    path: &SimPath,
    model: &ValidatedModel,
    fms: &FluidTrajectory,
) -> Result<ResidualSeries> {
    let k = model.classes();
    let r = path.r;
    let horizon = path.horizon();
    let lambda = model.lambda();
    let p = model.p();

    // prefix sums over slots of m(W), h m(W) and W / R
    let n_states = path.states.len();
    let mut sum_m = vec![vec![0.0; k]; n_states];
    let mut sum_hm = vec![vec![0.0; k]; n_states];
    let mut sum_w = vec![vec![0.0; k]; n_states];
    let mut dirs = Vec::with_capacity(n_states);
    for (n, state) in path.states.iter().enumerate() {
        let w = state.as_f64();
        let m = drift_direction_m(&w, lambda);
        if n + 1 < n_states {
            let hm = success_probabilities(state);
            for i in 0..k {
                sum_m[n + 1][i] = sum_m[n][i] + m[i];
                sum_hm[n + 1][i] = sum_hm[n][i] + hm[i];
                sum_w[n + 1][i] = sum_w[n][i] + w[i] / r;
            }
        }
        dirs.push(m);
    }
    let mart = martingale_residual(path, model);
    let w0: Vec<f64> = path.states[0].0.iter().map(|&w| w as f64 / r).collect();

    let mut out = ResidualSeries {
        grid: fms.grid.clone(),
        total: Vec::with_capacity(fms.len()),
        martingale: Vec::with_capacity(fms.len()),
        floor_gap: Vec::with_capacity(fms.len()),
        throughput_gap: Vec::with_capacity(fms.len()),
        fractional_slot: Vec::with_capacity(fms.len()),
    };
    for &t in &fms.grid {
        let n = slot_index(r, t);
        if !(t >= 0.0) || n > horizon {
            return Err(Error::GridMismatch(format!(
                "grid time {t} maps to slot {n}, beyond the path horizon {horizon}"
            )));
        }
        let n = n as usize;
        let frac = t - n as f64 / r;
        let w: Vec<f64> = path.states[n].0.iter().map(|&x| x as f64 / r).collect();
        let mut total = vec![0.0; k];
        let mut mg = vec![0.0; k];
        let mut g1 = vec![0.0; k];
        let mut g2 = vec![0.0; k];
        let mut g3 = vec![0.0; k];
        for i in 0..k {
            let int_m = sum_m[n][i] / r + frac * dirs[n][i];
            let int_w = sum_w[n][i] / r + frac * w[i];
            total[i] = w[i] - w0[i] - t * lambda[i] + E_INV * int_m + p[i] * int_w;
            mg[i] = mart[n][i] / r;
            g1[i] = (n as f64 / r - t) * lambda[i];
            g2[i] = E_INV * int_m - (1.0 - p[i] / r) * sum_hm[n][i] / r;
            g3[i] = p[i] * frac * w[i];
        }
        out.total.push(total);
        out.martingale.push(mg);
        out.floor_gap.push(g1);
        out.throughput_gap.push(g2);
        out.fractional_slot.push(g3);
    }
    Ok(out)
}

impl ResidualSeries {
    /// Largest `|M + G1 + G2 + G3 - G|` over the grid and coordinates.
    pub fn identity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..self.grid.len() {
            for i in 0..self.total[n].len() {
                let sum = self.martingale[n][i]
                    + self.floor_gap[n][i]
                    + self.throughput_gap[n][i]
                    + self.fractional_slot[n][i];
                worst = worst.max((sum - self.total[n][i]).abs());
            }
        }
        worst
    }

    /// `sup_t max_i |G_i(t)|`.
    pub fn sup_total(&self) -> f64 {
        self.total
            .iter()
            .flat_map(|v| v.iter())
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `t`, then for each class `i`: `G_total_i, M_i, G1_i, G2_i, G3_i`.
    pub fn to_csv(&self) -> String {
        let k = self.total.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 1..=k {
            out.push_str(&format!(",G_total_{i},M_{i},G1_{i},G2_{i},G3_{i}"));
        }
        out.push('\n');
        for n in 0..self.grid.len() {
            out.push_str(&self.grid[n].to_string());
            for i in 0..k {
                for x in [
                    self.total[n][i],
                    self.martingale[n][i],
                    self.floor_gap[n][i],
                    self.throughput_gap[n][i],
                    self.fractional_slot[n][i],
                ] {
                    out.push(',');
                    out.push_str(&x.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::integrate_fms;
    use crate::model::{IntegerState, ModelParams};
    use crate::simulator::run_path;

    #[test]
    fn components_sum_to_total() {
        let m = ModelParams::poisson(vec![0.5, 0.5], vec![1.0, 0.5]).validate().unwrap();
        let r = 37.0;
        let path = run_path(&m, r, (r * 3.0) as u64 + 1, &IntegerState(vec![5, 9]), 8).unwrap();
        let fms = integrate_fms(&[5.0 / r, 9.0 / r], &m, 3.0, 0.01).unwrap();
        let res = residual_decomposition(&path, &m, &fms).unwrap();
        assert!(res.identity_error() < 1e-10);
        assert!(res.total[0].iter().all(|&x| x == 0.0));
        assert!(res.martingale[0].iter().all(|&x| x == 0.0));
        let lam_sup = 0.5;
        for g in &res.floor_gap {
            assert!(g.iter().all(|x| x.abs() <= lam_sup / r + 1e-15));
        }
        assert!(res.to_csv().starts_with("t,G_total_1,M_1,G1_1,G2_1,G3_1,G_total_2"));
    }

    #[test]
    fn grid_beyond_path_is_rejected() {
        let m = ModelParams::poisson(vec![0.5, 0.5], vec![1.0, 0.5]).validate().unwrap();
        let path = run_path(&m, 10.0, 5, &IntegerState(vec![1, 1]), 1).unwrap();
        let fms = integrate_fms(&[0.1, 0.1], &m, 1.0, 0.1).unwrap();
        assert!(matches!(residual_decomposition(&path, &m, &fms), Err(Error::GridMismatch(_))));
    }
}
