//! Model parameters and the pure kernels shared by the simulator and the fluid solvers.
//!
//! The protocol: every customer present in a slot transmits with probability
//! `1/n` where `n` is the total number of customers, a slot succeeds iff exactly
//! one customer transmits, and every unsuccessful customer of class `i` abandons
//! the system with probability `p_i / R` at the end of the slot.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Assumption, Error, Result};

/// e^{-1}, the limiting ALOHA throughput.
pub const E_INV: f64 = 0.367_879_441_171_442_33;

const PROB_SUM_TOL: f64 = 1e-12;

/// Distribution of the per-slot arrival vector A(n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrivalSpec {
    /// Independent Poisson arrivals per class.
    Poisson { rates: Vec<f64> },
    /// A finite distribution over arrival vectors; coordinates may be dependent.
    Categorical { support: Vec<Vec<u64>>, probs: Vec<f64> },
}

impl ArrivalSpec {
    pub fn classes(&self) -> Option<usize> {
        match self {
            ArrivalSpec::Poisson { rates } => Some(rates.len()),
            ArrivalSpec::Categorical { support, .. } => support.first().map(Vec::len),
        }
    }

    /// Mean arrival vector, when the distribution is well formed.
    pub fn mean(&self) -> Vec<f64> {
        match self {
            ArrivalSpec::Poisson { rates } => rates.clone(),
            ArrivalSpec::Categorical { support, probs } => {
                let k = support.first().map_or(0, Vec::len);
                let mut mean = vec![0.0; k];
                for (outcome, &pr) in support.iter().zip(probs) {
                    for (m, &a) in mean.iter_mut().zip(outcome) {
                        *m += pr * a as f64;
                    }
                }
                mean
            }
        }
    }
}

/// Raw, unvalidated model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Mean arrivals per slot per class.
    pub lambda: Vec<f64>,
    /// Fluid-scale impatience parameters; the simulator uses `p_i / R`.
    pub p: Vec<f64>,
    pub arrival: ArrivalSpec,
}

impl ModelParams {
    /// Independent Poisson arrivals with the given means.
    pub fn poisson(lambda: Vec<f64>, p: Vec<f64>) -> Self {
        ModelParams {
            arrival: ArrivalSpec::Poisson { rates: lambda.clone() },
            lambda,
            p,
        }
    }

    /// Categorical arrivals; `lambda` is derived from the distribution.
    pub fn categorical(support: Vec<Vec<u64>>, probs: Vec<f64>, p: Vec<f64>) -> Self {
        let arrival = ArrivalSpec::Categorical { support, probs };
        ModelParams { lambda: arrival.mean(), p, arrival }
    }

    pub fn validate(self) -> Result<ValidatedModel> {
        validate_params(self)
    }
}

/// Immutable handle on parameters that satisfy every model invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "ModelParams")]
pub struct ValidatedModel {
    params: ModelParams,
    lambda_norm: f64,
    p_min: f64,
    p_max: f64,
    /// Cumulative probabilities for categorical sampling.
    cdf: Vec<f64>,
}

impl From<ValidatedModel> for ModelParams {
    fn from(m: ValidatedModel) -> Self {
        m.params
    }
}

impl<'de> Deserialize<'de> for ValidatedModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let params = ModelParams::deserialize(d)?;
        validate_params(params).map_err(serde::de::Error::custom)
    }
}

impl ValidatedModel {
    pub fn classes(&self) -> usize {
        self.params.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.params.lambda
    }

    pub fn p(&self) -> &[f64] {
        &self.params.p
    }

    pub fn arrival(&self) -> &ArrivalSpec {
        &self.params.arrival
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// ‖Λ‖₁.
    pub fn lambda_norm(&self) -> f64 {
        self.lambda_norm
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Short human-readable identity of the parameter set.
    pub fn fingerprint(&self) -> String {
        let kind = match &self.params.arrival {
            ArrivalSpec::Poisson { .. } => "poisson",
            ArrivalSpec::Categorical { .. } => "categorical",
        };
        format!(
            "K={};lambda={:?};p={:?};arrival={}",
            self.classes(),
            self.params.lambda,
            self.params.p,
            kind
        )
    }

    /// Draws one arrival vector A(n) into `out`.
    pub fn sample_arrivals<G: Rng + ?Sized>(&self, rng: &mut G, out: &mut [u64]) {
        match &self.params.arrival {
            ArrivalSpec::Poisson { rates } => {
                for (a, &rate) in out.iter_mut().zip(rates) {
                    // rates are validated positive and finite
                    let dist = Poisson::new(rate).expect("validated poisson rate");
                    *a = dist.sample(rng) as u64;
                }
            }
            ArrivalSpec::Categorical { support, .. } => {
                let u: f64 = rng.random();
                let idx = self
                    .cdf
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(support.len() - 1);
                out.copy_from_slice(&support[idx]);
            }
        }
    }
}

/// Per-class customer counts W(n).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerState(pub Vec<u64>);

impl IntegerState {
    pub fn zeros(k: usize) -> Self {
        IntegerState(vec![0; k])
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }

    /// Rounds `R * z` coordinatewise.
    pub fn from_fluid(z: &[f64], r: f64) -> Self {
        IntegerState(z.iter().map(|&zi| (r * zi).round().max(0.0) as u64).collect())
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&w| w as f64).collect()
    }
}

pub fn validate_params(raw: ModelParams) -> Result<ValidatedModel> {
    let k = raw.lambda.len();
    if k == 0 {
        return Err(Error::DimensionMismatch("model needs at least one class".into()));
    }
    if raw.p.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "lambda has {k} classes but p has {}",
            raw.p.len()
        )));
    }
    for (i, &pi) in raw.p.iter().enumerate() {
        if !(pi > 0.0 && pi <= 1.0) {
            return Err(Error::InvalidProbability(format!("p[{i}] = {pi} is not in (0, 1]")));
        }
    }

    let mut cdf = Vec::new();
    match &raw.arrival {
        ArrivalSpec::Poisson { rates } => {
            if rates.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "lambda has {k} classes but poisson rates have {}",
                    rates.len()
                )));
            }
            if rates != &raw.lambda {
                return Err(Error::DimensionMismatch(
                    "poisson rates must equal lambda".into(),
                ));
            }
        }
        ArrivalSpec::Categorical { support, probs } => {
            if support.is_empty() || support.len() != probs.len() {
                return Err(Error::DimensionMismatch(format!(
                    "categorical support has {} outcomes and {} probabilities",
                    support.len(),
                    probs.len()
                )));
            }
            if let Some(bad) = support.iter().find(|s| s.len() != k) {
                return Err(Error::DimensionMismatch(format!(
                    "categorical outcome {bad:?} does not have {k} classes"
                )));
            }
            for (j, &pr) in probs.iter().enumerate() {
                if !(pr >= 0.0 && pr.is_finite()) {
                    return Err(Error::InvalidProbability(format!("probs[{j}] = {pr}")));
                }
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > PROB_SUM_TOL {
                return Err(Error::InvalidProbability(format!(
                    "categorical probabilities sum to {total}, not 1"
                )));
            }
            let mean = raw.arrival.mean();
            if mean
                .iter()
                .zip(&raw.lambda)
                .any(|(m, l)| (m - l).abs() > PROB_SUM_TOL)
            {
                return Err(Error::DimensionMismatch(format!(
                    "lambda {:?} differs from the categorical mean {mean:?}",
                    raw.lambda
                )));
            }
            let non_trivial = support
                .iter()
                .zip(probs)
                .any(|(s, &pr)| pr > 0.0 && s.iter().sum::<u64>() >= 2);
            if !non_trivial {
                return Err(Error::AssumptionViolated(Assumption::NonTrivialArrivals));
            }
            let mut acc = 0.0;
            cdf = probs
                .iter()
                .map(|&pr| {
                    acc += pr;
                    acc
                })
                .collect();
        }
    }

    for (i, &li) in raw.lambda.iter().enumerate() {
        if !(li > 0.0 && li.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda[{i}] = {li} must be positive and finite"
            )));
        }
    }
    let lambda_norm: f64 = raw.lambda.iter().sum();
    if lambda_norm <= E_INV {
        return Err(Error::AssumptionViolated(Assumption::Overload));
    }

    let p_min = raw.p.iter().copied().fold(f64::INFINITY, f64::min);
    let p_max = raw.p.iter().copied().fold(0.0, f64::max);
    Ok(ValidatedModel { params: raw, lambda_norm, p_min, p_max, cdf })
}

/// Probability that exactly one of `n` customers transmits when each transmits
/// with probability `1/n`: `h(n) = (1 - 1/n)^(n-1)`, with `h(0) = 0`, `h(1) = 1`.
pub fn throughput_h(n: u64) -> f64 {
    match n {
        0 => 0.0,
        1 => 1.0,
        _ => {
            let nf = n as f64;
            ((nf - 1.0) * (-1.0 / nf).ln_1p()).exp()
        }
    }
}

/// Drift direction `x / ‖x‖₁`, extended by `Λ / ‖Λ‖₁` at the origin.
pub fn drift_direction_m(x: &[f64], lambda: &[f64]) -> Vec<f64> {
    let norm: f64 = x.iter().sum();
    let src = if norm > 0.0 { x } else { lambda };
    normalize(src)
}

/// Divides by the sum, then renormalizes once more so the output sums to 1.
fn normalize(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    let mut out: Vec<f64> = v.iter().map(|&x| x / s).collect();
    let s2: f64 = out.iter().sum();
    if s2 != 1.0 {
        out.iter_mut().for_each(|x| *x /= s2);
    }
    out
}

/// Per-class probability that the slot is a success of that class,
/// `p_i(x) = h(‖x‖₁) · x_i / ‖x‖₁`.
pub fn success_probabilities(x: &IntegerState) -> Vec<f64> {
    let n = x.total();
    if n == 0 {
        return vec![0.0; x.classes()];
    }
    let h = throughput_h(n);
    let nf = n as f64;
    x.0.iter().map(|&xi| h * (xi as f64 / nf)).collect()
}

/// Thresholds `c_1 ≤ … ≤ c_K` against which the transmission uniform is tested:
/// class `i` succeeds iff `c_{i-1} ≤ U < c_i`. The last threshold is pinned to
/// `h(‖x‖₁)` so that "some class succeeds" is exactly `U < h(‖x‖₁)`.
pub(crate) fn success_thresholds(x: &IntegerState, out: &mut Vec<f64>) {
    out.clear();
    let n = x.total();
    if n == 0 {
        out.resize(x.classes(), 0.0);
        return;
    }
    let h = throughput_h(n);
    let mut acc = 0u64;
    for &xi in &x.0 {
        acc += xi;
        out.push(h * (acc as f64 / n as f64));
    }
    if let Some(last) = out.last_mut() {
        *last = h;
    }
}
