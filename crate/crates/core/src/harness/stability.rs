use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fluid::{equilibrium, integrate_fms, lyapunov_v};
use crate::model::ValidatedModel;
use crate::trajectory::sup_norm_diff;

/// Slack allowed when checking that `V` does not increase between grid points.
pub const V_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub z0: Vec<f64>,
    /// `max_i |z_i(t_max) - z_e,i|`.
    pub terminal_distance: f64,
    pub v_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityTable {
    pub z_e: Vec<f64>,
    pub rows: Vec<StabilityRow>,
    /// Largest sup-distance between the terminal states of any two rows.
    pub max_mutual_distance: f64,
}

pub fn stability_experiment(
    model: &ValidatedModel,
    z0_list: &[Vec<f64>],
    t_max: f64,
    dt: f64,
) -> Result<StabilityTable> {
    let z_e = equilibrium(model)?.z_e;
    let mut rows = Vec::with_capacity(z0_list.len());
    let mut terminals = Vec::with_capacity(z0_list.len());
    for z0 in z0_list {
        let traj = integrate_fms(z0, model, t_max, dt)?;
        let v: Vec<f64> = traj.values.iter().map(|z| lyapunov_v(z, &z_e)).collect();
        let v_monotone = v.windows(2).all(|w| w[1] <= w[0] + V_SLACK);
        let end = traj.last().unwrap_or(z0).to_vec();
        rows.push(StabilityRow {
            z0: z0.clone(),
            terminal_distance: sup_norm_diff(&end, &z_e),
            v_monotone,
        });
        terminals.push(end);
    }
    let mut max_mutual_distance: f64 = 0.0;
    for (i, a) in terminals.iter().enumerate() {
        for b in &terminals[i + 1..] {
            max_mutual_distance = max_mutual_distance.max(sup_norm_diff(a, b));
        }
    }
    Ok(StabilityTable { z_e, rows, max_mutual_distance })
}

impl StabilityTable {
    /// CSV with columns `z0, terminal_distance, v_monotone`; `z0` is `;`-separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z0,terminal_distance,v_monotone\n");
        for row in &self.rows {
            let z0: Vec<String> = row.z0.iter().map(f64::to_string).collect();
            out.push_str(&format!("{},{},{}\n", z0.join(";"), row.terminal_distance, row.v_monotone));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    #[test]
    fn equilibrium_start_is_stationary() {
        let m = ModelParams::poisson(vec![0.5, 0.5], vec![1.0, 0.5]).validate().unwrap();
        let ze = equilibrium(&m).unwrap().z_e;
        let table = stability_experiment(&m, &[ze], 5.0, 1e-3).unwrap();
        assert!(table.rows[0].terminal_distance <= 1e-8);
        assert!(table.rows[0].v_monotone);
    }

    #[test]
    fn distinct_starts_meet() {
        let m = ModelParams::poisson(vec![0.5, 0.5], vec![1.0, 0.5]).validate().unwrap();
        let ze = equilibrium(&m).unwrap().z_e;
        let far: Vec<f64> = ze.iter().map(|x| 10.0 * x).collect();
        let table = stability_experiment(&m, &[vec![0.0, 0.0], far], 40.0, 1e-2).unwrap();
        for row in &table.rows {
            assert!(row.terminal_distance <= 1e-4, "{row:?}");
            assert!(row.v_monotone);
        }
        assert!(table.max_mutual_distance <= 1e-4);
        assert_eq!(table.to_csv().lines().count(), 3);
    }
}
