//! Exact slot-by-slot simulation of the workload chain
//! `W(n+1) = W(n) + A(n+1) - T(n, W(n)) - I(n, W(n))`.
//!
//! Within a slot the transmission outcome is resolved on the pre-arrival
//! population with a single uniform `U(n)` tested against cumulative success
//! probabilities; the survivors then renege independently with probability
//! `p_i / R`; arrivals are appended last.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{success_thresholds, throughput_h, IntegerState, ValidatedModel};
use crate::rng::{Purpose, RngPlan};
use crate::trajectory::FluidTrajectory;

/// How reneging customers are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenegingSampler {
    /// One uniform `U(n, j)` per surviving customer, indexed across classes in
    /// class order. Required for coupling.
    #[default]
    PerCustomer,
    /// One binomial draw per class; equal in law, much faster for large R.
    Binomial,
}

/// What happened during one slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotEvent {
    /// Arrivals appended at the end of the slot, A(n+1).
    pub arrivals: Vec<u64>,
    /// 0-based index of the class that transmitted successfully.
    pub success_class: Option<usize>,
    pub reneged: Vec<u64>,
}

/// Where the randomness of one slot comes from.
#[derive(Debug, Clone, Copy)]
pub struct SlotRng {
    pub plan: RngPlan,
    pub replication: u64,
    pub slot: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct PathOptions {
    pub plan: RngPlan,
    pub replication: u64,
    pub reneging: RenegingSampler,
}

impl PathOptions {
    pub fn seeded(seed: u64) -> Self {
        PathOptions {
            plan: RngPlan::new(seed),
            replication: 0,
            reneging: RenegingSampler::PerCustomer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPath {
    pub r: f64,
    pub initial: IntegerState,
    pub events: Vec<SlotEvent>,
    /// `states[0] == initial`, `states.len() == events.len() + 1`.
    pub states: Vec<IntegerState>,
}

fn check_scaling(model: &ValidatedModel, r: f64) -> Result<()> {
    if !(r >= model.p_max()) || !r.is_finite() {
        return Err(Error::ScalingTooSmall { r, max_p: model.p_max() });
    }
    Ok(())
}

/// Index of the succeeding class for transmission uniform `u`, given the
/// cumulative thresholds from [`success_thresholds`].
fn transmission_outcome(thresholds: &[f64], u: f64) -> Option<usize> {
    thresholds.iter().position(|&c| u < c)
}

struct Stepper<'a> {
    model: &'a ValidatedModel,
    r: f64,
    reneging: RenegingSampler,
    thresholds: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(model: &'a ValidatedModel, r: f64, reneging: RenegingSampler) -> Result<Self> {
        check_scaling(model, r)?;
        Ok(Stepper { model, r, reneging, thresholds: Vec::with_capacity(model.classes()) })
    }

    fn step(&mut self, state: &IntegerState, rng: SlotRng) -> (IntegerState, SlotEvent) {
        let k = self.model.classes();
        success_thresholds(state, &mut self.thresholds);
        let u: f64 = rng.plan.stream(rng.replication, Purpose::Transmission, rng.slot).random();
        let success_class = transmission_outcome(&self.thresholds, u);

        let mut reneged = vec![0u64; k];
        let mut renege_rng = rng.plan.stream(rng.replication, Purpose::Reneging, rng.slot);
        for (i, (ren, &w)) in reneged.iter_mut().zip(&state.0).enumerate() {
            let survivors = w - u64::from(success_class == Some(i));
            let prob = self.model.p()[i] / self.r;
            *ren = match self.reneging {
                RenegingSampler::PerCustomer => (0..survivors)
                    .filter(|_| renege_rng.random::<f64>() < prob)
                    .count() as u64,
                RenegingSampler::Binomial => {
                    if survivors == 0 {
                        0
                    } else {
                        Binomial::new(survivors, prob)
                            .expect("reneging probability lies in (0, 1]")
                            .sample(&mut renege_rng)
                    }
                }
            };
        }

        let mut arrivals = vec![0u64; k];
        let mut arr_rng = rng.plan.stream(rng.replication, Purpose::Arrivals, rng.slot);
        self.model.sample_arrivals(&mut arr_rng, &mut arrivals);

        let next = IntegerState(
            (0..k)
                .map(|i| {
                    state.0[i] + arrivals[i] - u64::from(success_class == Some(i)) - reneged[i]
                })
                .collect(),
        );
        (next, SlotEvent { arrivals, success_class, reneged })
    }
}

/// Advances the chain by one slot.
pub fn step(
    state: &IntegerState,
    model: &ValidatedModel,
    r: f64,
    rng: SlotRng,
    reneging: RenegingSampler,
) -> Result<(IntegerState, SlotEvent)> {
    if state.classes() != model.classes() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} classes, model has {}",
            state.classes(),
            model.classes()
        )));
    }
    let mut stepper = Stepper::new(model, r, reneging)?;
    Ok(stepper.step(state, rng))
}

/// Simulates `horizon` slots from `initial` with per-customer reneging.
pub fn run_path(
    model: &ValidatedModel,
    r: f64,
    horizon: u64,
    initial: &IntegerState,
    seed: u64,
) -> Result<SimPath> {
    run_path_with(model, r, horizon, initial, PathOptions::seeded(seed))
}

pub fn run_path_with(
    model: &ValidatedModel,
    r: f64,
    horizon: u64,
    initial: &IntegerState,
    opts: PathOptions,
) -> Result<SimPath> {
    if initial.classes() != model.classes() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} classes, model has {}",
            initial.classes(),
            model.classes()
        )));
    }
    let mut stepper = Stepper::new(model, r, opts.reneging)?;
    let mut states = Vec::with_capacity(horizon as usize + 1);
    let mut events = Vec::with_capacity(horizon as usize);
    states.push(initial.clone());
    for slot in 0..horizon {
        let rng = SlotRng { plan: opts.plan, replication: opts.replication, slot };
        let (next, ev) = stepper.step(&states[slot as usize], rng);
        states.push(next);
        events.push(ev);
    }
    Ok(SimPath { r, initial: initial.clone(), events, states })
}

/// Slot index `⌊R t⌋`, snapping products that sit within rounding of an integer.
pub fn slot_index(r: f64, t: f64) -> u64 {
    let x = r * t;
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u64
    } else {
        x.floor() as u64
    }
}

impl SimPath {
    pub fn horizon(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn classes(&self) -> usize {
        self.initial.classes()
    }

    /// Replays the per-slot identity and the single-success rule; returns the
    /// first offending slot.
    pub fn check_identity(&self) -> std::result::Result<(), String> {
        if self.states.len() != self.events.len() + 1 || self.states[0] != self.initial {
            return Err("path shape is inconsistent".into());
        }
        for (n, ev) in self.events.iter().enumerate() {
            let cur = &self.states[n].0;
            let next = &self.states[n + 1].0;
            if let Some(c) = ev.success_class {
                if c >= cur.len() || cur[c] == 0 {
                    return Err(format!("slot {n}: success of class {c} from an empty class"));
                }
            }
            for i in 0..cur.len() {
                let t = u64::from(ev.success_class == Some(i));
                if ev.reneged[i] > cur[i] - t {
                    return Err(format!("slot {n}: class {i} reneged more than its survivors"));
                }
                if next[i] != cur[i] + ev.arrivals[i] - t - ev.reneged[i] {
                    return Err(format!("slot {n}: per-slot identity fails for class {i}"));
                }
            }
        }
        Ok(())
    }

    /// CSV with columns `slot, w_1..w_K, success_class, reneged_1..reneged_K,
    /// arrivals_1..arrivals_K`. `success_class` is 1-based with 0 for none. The
    /// final row carries the terminal state with empty event columns.
    pub fn to_csv(&self) -> String {
        let k = self.classes();
        let mut out = String::from("slot");
        for i in 1..=k {
            out.push_str(&format!(",w_{i}"));
        }
        out.push_str(",success_class");
        for i in 1..=k {
            out.push_str(&format!(",reneged_{i}"));
        }
        for i in 1..=k {
            out.push_str(&format!(",arrivals_{i}"));
        }
        out.push('\n');
        for (n, state) in self.states.iter().enumerate() {
            out.push_str(&n.to_string());
            for w in &state.0 {
                out.push_str(&format!(",{w}"));
            }
            match self.events.get(n) {
                Some(ev) => {
                    out.push_str(&format!(",{}", ev.success_class.map_or(0, |c| c + 1)));
                    for x in ev.reneged.iter().chain(&ev.arrivals) {
                        out.push_str(&format!(",{x}"));
                    }
                }
                None => out.push_str(&",".repeat(2 * k + 1)),
            }
            out.push('\n');
        }
        out
    }
}

/// Fluid-scaled samples `W(⌊R t⌋) / R` on `grid` (piecewise constant, no interpolation).
pub fn scaled_path(path: &SimPath, grid: &[f64]) -> Result<FluidTrajectory> {
    let horizon = path.horizon();
    let mut values = Vec::with_capacity(grid.len());
    for &t in grid {
        if !(t >= 0.0) {
            return Err(Error::GridOutOfRange { t, slot: 0, horizon });
        }
        let slot = slot_index(path.r, t);
        if slot > horizon {
            return Err(Error::GridOutOfRange { t, slot, horizon });
        }
        values.push(path.states[slot as usize].0.iter().map(|&w| w as f64 / path.r).collect());
    }
    FluidTrajectory::new(grid.to_vec(), values)
}

/// Compensated workload
/// `M(n) = W(n) - W(0) - nΛ + Σ_{i<n} h m(W(i)) + (p/R) * Σ_{i<n} (W(i) - h m(W(i)))`,
/// with `h m(x)` the vector of success probabilities. `M(0) = 0`.
pub fn martingale_residual(path: &SimPath, model: &ValidatedModel) -> Vec<Vec<f64>> {
    let k = model.classes();
    let r = path.r;
    let w0 = path.states[0].as_f64();
    let mut drift = vec![0.0; k];
    let mut out = Vec::with_capacity(path.states.len());
    for (n, state) in path.states.iter().enumerate() {
        let w = state.as_f64();
        out.push(
            (0..k)
                .map(|i| w[i] - w0[i] - n as f64 * model.lambda()[i] + drift[i])
                .collect(),
        );
        let succ = crate::model::success_probabilities(state);
        for i in 0..k {
            drift[i] += succ[i] + model.p()[i] / r * (w[i] - succ[i]);
        }
    }
    out
}

/// Runs the multiclass chain together with the single-class chain that starts
/// from `‖W(0)‖₁`, receives `‖A(n)‖₁`, reneges with `max_i p_i / R` and succeeds
/// iff `U(n) < h(k)`. Both chains read the same `U(n)` and `U(n, j)`; the single
/// class path never exceeds the total multiclass workload.
pub fn coupled_single_class_bound(
    model: &ValidatedModel,
    r: f64,
    horizon: u64,
    initial: &IntegerState,
    seed: u64,
) -> Result<(SimPath, Vec<u64>)> {
    coupled_single_class_bound_with(model, r, horizon, initial, RngPlan::new(seed), 0)
}

pub fn coupled_single_class_bound_with(
    model: &ValidatedModel,
    r: f64,
    horizon: u64,
    initial: &IntegerState,
    plan: RngPlan,
    replication: u64,
) -> Result<(SimPath, Vec<u64>)> {
    let opts = PathOptions { plan, replication, reneging: RenegingSampler::PerCustomer };
    let multi = run_path_with(model, r, horizon, initial, opts)?;
    let mut single = Vec::with_capacity(multi.states.len());
    single.push(initial.total());
    let prob = model.p_max() / r;
    for (slot, ev) in multi.events.iter().enumerate() {
        let k = single[slot];
        let rng = SlotRng { plan, replication, slot: slot as u64 };
        let arrivals: u64 = ev.arrivals.iter().sum();
        single.push(single_class_step(k, arrivals, prob, rng));
    }
    Ok((multi, single))
}

fn single_class_step(k: u64, arrivals: u64, prob: f64, rng: SlotRng) -> u64 {
    let u: f64 = rng.plan.stream(rng.replication, Purpose::Transmission, rng.slot).random();
    let success = u64::from(u < throughput_h(k));
    let mut renege_rng = rng.plan.stream(rng.replication, Purpose::Reneging, rng.slot);
    let reneged = (0..k - success)
        .filter(|_| renege_rng.random::<f64>() < prob)
        .count() as u64;
    k - success - reneged + arrivals
}

/// Single-class chain with total arrivals `‖A(n)‖₁` drawn from `model` and
/// reneging probability `p_tilde / R`, on the randomness of `(plan, replication)`.
/// Two calls that differ only in `initial` share every uniform.
pub fn single_class_path(
    model: &ValidatedModel,
    r: f64,
    horizon: u64,
    initial: u64,
    p_tilde: f64,
    plan: RngPlan,
    replication: u64,
) -> Result<Vec<u64>> {
    check_scaling(model, r)?;
    if !(p_tilde > 0.0 && p_tilde <= r) {
        return Err(Error::InvalidProbability(format!("p_tilde / R = {} not in (0, 1]", p_tilde / r)));
    }
    let mut out = Vec::with_capacity(horizon as usize + 1);
    out.push(initial);
    let mut arrivals = vec![0u64; model.classes()];
    for slot in 0..horizon {
        let rng = SlotRng { plan, replication, slot };
        let mut arr_rng = plan.stream(replication, Purpose::Arrivals, slot);
        model.sample_arrivals(&mut arr_rng, &mut arrivals);
        let k = out[slot as usize];
        out.push(single_class_step(k, arrivals.iter().sum(), p_tilde / r, rng));
    }
    Ok(out)
}

/// Frequency of each success class over `trials` independent transmission
/// draws from state `x`.
pub fn empirical_success_rate(x: &IntegerState, trials: u64, seed: u64) -> Vec<f64> {
    let mut thresholds = Vec::new();
    success_thresholds(x, &mut thresholds);
    let mut counts = vec![0u64; x.classes()];
    let mut rng = RngPlan::new(seed).stream(0, Purpose::Transmission, 0);
    for _ in 0..trials {
        if let Some(c) = transmission_outcome(&thresholds, rng.random()) {
            counts[c] += 1;
        }
    }
    counts.iter().map(|&c| c as f64 / trials as f64).collect()
}
