//! Self-check suites run by the `validate` command.

use rand::Rng;

use crate::error::Result;
use crate::fluid::{
    equilibrium, fms_coord_bounds, fms_norm_bounds, integrate_fms, lyapunov_v, lyapunov_vdot,
    quadratic_form_uk,
};
use crate::model::{success_probabilities, throughput_h, IntegerState, ValidatedModel, E_INV};
use crate::rng::{Purpose, RngPlan};
use crate::simulator::{coupled_single_class_bound_with, run_path_with, PathOptions, RenegingSampler};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl SuiteResult {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        SuiteResult { name, passed, detail: detail.into() }
    }
}

/// Probability that exactly one customer transmits and that it belongs to each
/// class, by enumerating every transmit/silent pattern of the `‖x‖₁` customers.
pub fn enumerate_success_probabilities(x: &IntegerState) -> Vec<f64> {
    let n = x.total() as usize;
    let k = x.classes();
    let mut out = vec![0.0; k];
    if n == 0 {
        return out;
    }
    let q = 1.0 / n as f64;
    let owner: Vec<usize> = x.0.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize)).collect();
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() != 1 {
            continue;
        }
        let who = mask.trailing_zeros() as usize;
        out[owner[who]] += q * (1.0 - q).powi(n as i32 - 1);
    }
    out
}

pub fn run_validation(model: &ValidatedModel, seed: u64) -> Result<Vec<SuiteResult>> {
    let k = model.classes();
    let mut suites = Vec::new();

    suites.push(SuiteResult::new(
        "model assumptions",
        model.lambda_norm() > E_INV,
        format!("K={k}, |lambda|_1={}", model.lambda_norm()),
    ));

    let mut h_ok = true;
    let mut prev = throughput_h(1);
    for n in 2..=100_000u64 {
        let h = throughput_h(n);
        h_ok &= h < prev && h > E_INV;
        prev = h;
    }
    suites.push(SuiteResult::new("throughput h decreasing to e^-1", h_ok, "n <= 1e5"));

    let plan = RngPlan::new(seed);
    let mut aux = plan.stream(0, Purpose::Auxiliary, 0);
    let mut sum_err: f64 = 0.0;
    let mut enum_err: f64 = 0.0;
    for _ in 0..200 {
        let x = IntegerState((0..k).map(|_| aux.random_range(0..=12u64 / k as u64)).collect());
        let p = success_probabilities(&x);
        if x.total() > 0 {
            sum_err = sum_err.max((p.iter().sum::<f64>() - throughput_h(x.total())).abs());
        }
        let e = enumerate_success_probabilities(&x);
        enum_err = enum_err.max(p.iter().zip(&e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    suites.push(SuiteResult::new(
        "success probabilities vs enumeration",
        sum_err <= 1e-14 && enum_err <= 1e-12,
        format!("sum error {sum_err:e}, enumeration error {enum_err:e}"),
    ));

    let eq = equilibrium(model)?;
    suites.push(SuiteResult::new(
        "equilibrium residual",
        eq.residual <= 1e-9,
        format!("x={}, residual {:e}", eq.x_root, eq.residual),
    ));

    let mut worst_vdot = f64::NEG_INFINITY;
    let mut worst_uk = f64::INFINITY;
    for _ in 0..10_000 {
        let z: Vec<f64> = eq.z_e.iter().map(|&e| e * 5.0 * (1.0 - aux.random::<f64>())).collect();
        let y: Vec<f64> = z.iter().zip(&eq.z_e).map(|(a, b)| a - b).collect();
        worst_vdot = worst_vdot.max(lyapunov_vdot(&z, &eq.z_e, model));
        worst_uk = worst_uk.min(quadratic_form_uk(&y, &eq.z_e));
    }
    suites.push(SuiteResult::new(
        "lyapunov derivative non-positive",
        worst_vdot <= 1e-12 && worst_uk >= -1e-12,
        format!("max Vdot {worst_vdot:e}, min u_K {worst_uk:e}"),
    ));

    let mut traj_ok = true;
    let mut traj_detail = String::new();
    let starts = [
        vec![0.0; k],
        eq.z_e.iter().map(|x| 3.0 * x).collect::<Vec<_>>(),
        (0..k).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
    ];
    for z0 in &starts {
        let traj = integrate_fms(z0, model, 40.0, 1e-2)?;
        let (l, u) = fms_norm_bounds(z0, model);
        let (li, ui) = fms_coord_bounds(z0, model);
        let tol = 1e-9;
        let bounds_ok = traj.values.iter().all(|z| {
            let s: f64 = z.iter().sum();
            s >= l - tol && s <= u + tol && (0..k).all(|i| z[i] >= li[i] - tol && z[i] <= ui[i] + tol)
        });
        let v: Vec<f64> = traj.values.iter().map(|z| lyapunov_v(z, &eq.z_e)).collect();
        let v_ok = v.windows(2).all(|w| w[1] <= w[0] + 1e-8);
        let end = traj.last().unwrap_or(z0);
        let dist = end.iter().zip(&eq.z_e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        traj_ok &= bounds_ok && v_ok && dist <= 1e-4 && traj.check_positive_off_zero();
        traj_detail.push_str(&format!("[bounds {bounds_ok}, V monotone {v_ok}, |z(40)-z_e| {dist:e}] "));
    }
    suites.push(SuiteResult::new("fluid trajectories", traj_ok, traj_detail.trim_end()));

    let r = 50.0_f64.max(model.p_max());
    let init = IntegerState::from_fluid(&eq.z_e, r);
    let mut identity_ok = true;
    for (rep, sampler) in [RenegingSampler::PerCustomer, RenegingSampler::Binomial].into_iter().enumerate() {
        let opts = PathOptions { plan, replication: rep as u64, reneging: sampler };
        identity_ok &= run_path_with(model, r, 2_000, &init, opts)?.check_identity().is_ok();
    }
    suites.push(SuiteResult::new("per-slot identity", identity_ok, "2 paths x 2000 slots"));

    let mut violations = 0usize;
    for rep in 0..5u64 {
        let (multi, single) = coupled_single_class_bound_with(model, r, 2_000, &init, plan, 100 + rep)?;
        violations += single
            .iter()
            .zip(&multi.states)
            .filter(|(s, m)| **s > m.total())
            .count();
    }
    suites.push(SuiteResult::new(
        "coupled single-class domination",
        violations == 0,
        format!("{violations} violations over 5 x 2000 slots"),
    ));

    Ok(suites)
}

/// One line per suite: `PASS name: detail` or `FAIL name: detail`.
pub fn format_suites(suites: &[SuiteResult]) -> String {
    suites
        .iter()
        .map(|s| format!("{} {}: {}\n", if s.passed { "PASS" } else { "FAIL" }, s.name, s.detail))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    #[test]
    fn enumeration_small_cases() {
        let p = enumerate_success_probabilities(&IntegerState(vec![3, 1]));
        assert!((p[0] - 81.0 / 256.0).abs() < 1e-15);
        assert!((p[1] - 27.0 / 256.0).abs() < 1e-15);
        assert_eq!(enumerate_success_probabilities(&IntegerState(vec![0, 0])), vec![0.0, 0.0]);
    }

    #[test]
    fn reference_model_passes_every_suite() {
        let m = ModelParams::poisson(vec![0.5, 0.5], vec![1.0, 0.5]).validate().unwrap();
        let suites = run_validation(&m, 1).unwrap();
        assert!(suites.len() >= 8);
        for s in &suites {
            assert!(s.passed, "{}: {}", s.name, s.detail);
        }
        assert!(format_suites(&suites).lines().all(|l| l.starts_with("PASS ")));
    }
}
