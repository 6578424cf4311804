//! Monotone fixed-point iteration for the auxiliary integral equation
//!
//! ```text
//! z_i(t) = ε + Λ_i ∫_0^t exp( -a_i (t - s) - ∫_s^t e^{-1} / ‖z(x)‖₁ dx ) ds
//! ```
//!
//! With `(ε, a) = (0, p)` the fixed point is the fluid solution started at the
//! origin. The iteration is carried out on a uniform grid:
//!
//! * the inner integral uses the exact integral of `1 / ℓ` over each cell for
//!   the linear interpolant `ℓ` of `‖z‖₁` (a logarithmic mean), which stays
//!   finite next to the `1 / s` singularity at the origin;
//! * the outer integral is the trapezoid rule, evaluated for every grid time
//!   at once through the recursion `E(t_{k+1}) = q_k E(t_k) + dt (1 + q_k) / 2`;
//! * for `ε = 0` the first cell `[0, dt]` is integrated in closed form under
//!   the linear start `‖z(s)‖₁ ≈ (‖Λ‖₁ - e^{-1}) s`.

use crate::error::{Error, Result};
use crate::fluid::closed_form_equal_a;
use crate::model::{ValidatedModel, E_INV};
use crate::trajectory::{uniform_grid, FluidTrajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct PicardConfig {
    pub epsilon: f64,
    pub a: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl PicardConfig {
    pub fn new(epsilon: f64, a: Vec<f64>, dt: f64, horizon: f64) -> Self {
        PicardConfig { epsilon, a, dt, horizon, tol: 1e-10, max_iter: 1_000 }
    }

    fn validate(&self, k: usize) -> Result<()> {
        if self.a.len() != k {
            return Err(Error::DimensionMismatch(format!("a has {} entries, model has {k} classes", self.a.len())));
        }
        if !(self.epsilon >= 0.0) || self.a.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument("epsilon and a must be nonnegative".into()));
        }
        if !(self.dt > 0.0) || !(self.tol > 0.0) || !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidArgument("dt, tol and horizon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub trajectory: FluidTrajectory,
    pub iterations: usize,
    /// For each iteration, the smallest coordinate change `min (z^{n+1} - z^n)`
    /// over the grid; nonnegative entries mean the iterates were non-decreasing.
    pub min_increments: Vec<f64>,
}

/// `1 / L(a, b)` where `L` is the logarithmic mean, i.e. the average of `1/x`
/// over the linear interpolant between `a` and `b`.
fn inv_log_mean(a: f64, b: f64) -> f64 {
    let d = b - a;
    let m = 0.5 * (a + b);
    if d.abs() <= 1e-6 * m {
        // series of ln(b/a)/(b-a) around the midpoint
        let r = d / (2.0 * m);
        (1.0 + r * r / 3.0 + r.powi(4) / 5.0) / m
    } else {
        (b / a).ln() / d
    }
}

/// `∫_0^dt e^{-a (dt - s)} (s / dt)^β ds` as a power series in `a dt`.
fn first_cell(a: f64, beta: f64, dt: f64) -> f64 {
    let x = a * dt;
    let mut term = 1.0 / (beta + 1.0);
    let mut sum = term;
    for j in 1..200 {
        term *= -x / (beta + j as f64 + 1.0);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    dt * sum
}

struct Operator<'a> {
    lambda: &'a [f64],
    cfg: &'a PicardConfig,
    steps: usize,
    /// `e^{-1} / (‖Λ‖₁ - e^{-1})`.
    beta: f64,
}

impl Operator<'_> {
    /// Applies `F^{(ε,a)}` to the grid function with norms `norms`.
    fn apply(&self, norms: &[f64], out: &mut [Vec<f64>]) {
        let dt = self.cfg.dt;
        let eps = self.cfg.epsilon;
        let mut decay = vec![0.0; self.steps];
        let start = if eps == 0.0 { 1 } else { 0 };
        for k in start..self.steps {
            decay[k] = E_INV * dt * inv_log_mean(norms[k], norms[k + 1]);
        }
        for (i, (&lam, &a)) in self.lambda.iter().zip(&self.cfg.a).enumerate() {
            let mut e = 0.0;
            out[0][i] = eps;
            for k in 0..self.steps {
                e = if k == 0 && eps == 0.0 {
                    first_cell(a, self.beta, dt)
                } else {
                    let q = (-a * dt - decay[k]).exp();
                    q * e + 0.5 * dt * (1.0 + q)
                };
                out[k + 1][i] = eps + lam * e;
            }
        }
    }
}

/// Iterates `z^{n+1} = F^{(ε,a)}(z^n)` until the sup-norm change drops below `cfg.tol`.
///
/// For `ε > 0` the iteration starts from the constant `ε`. For `ε = 0` it
/// starts from the discrete solution with every damping raised to
/// `max_j a_j`, itself obtained by iterating from the equal-damping closed
/// form. Both starts lie below the fixed point and the discrete operator is
/// monotone, so the recorded iterates increase.
pub fn picard_solve(model: &ValidatedModel, cfg: &PicardConfig) -> Result<PicardOutcome> {
    let k = model.classes();
    cfg.validate(k)?;
    let grid = uniform_grid(cfg.horizon, cfg.dt);
    let steps = grid.len() - 1;
    if steps == 0 {
        return Err(Error::InvalidArgument("horizon must span at least one step".into()));
    }
    let beta = E_INV / (model.lambda_norm() - E_INV);
    let op = Operator { lambda: model.lambda(), cfg, steps, beta };

    let (start, warmup) = if cfg.epsilon > 0.0 {
        (vec![vec![cfg.epsilon; k]; grid.len()], 0)
    } else {
        let a_max = cfg.a.iter().copied().fold(0.0, f64::max);
        let upper_cfg = PicardConfig { a: vec![a_max; k], ..cfg.clone() };
        let upper = Operator { lambda: model.lambda(), cfg: &upper_cfg, steps, beta };
        let closed: Vec<Vec<f64>> =
            grid.iter().map(|&t| closed_form_equal_a(model.lambda(), a_max, t)).collect();
        let (values, iterations, _) = iterate(&upper, closed, cfg.tol, cfg.max_iter)?;
        (values, iterations)
    };
    let (values, iterations, min_increments) = iterate(&op, start, cfg.tol, cfg.max_iter)?;
    Ok(PicardOutcome {
        trajectory: FluidTrajectory::new(grid, values)?,
        iterations: warmup + iterations,
        min_increments,
    })
}

fn iterate(
    op: &Operator<'_>,
    mut cur: Vec<Vec<f64>>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<Vec<f64>>, usize, Vec<f64>)> {
    let mut next = cur.clone();
    let mut norms = vec![0.0; cur.len()];
    let mut min_increments = Vec::new();
    let mut change = f64::INFINITY;
    for iter in 1..=max_iter {
        for (n, v) in norms.iter_mut().zip(&cur) {
            *n = v.iter().sum();
        }
        op.apply(&norms, &mut next);
        let mut min_inc = f64::INFINITY;
        change = 0.0;
        for (nv, cv) in next.iter().zip(&cur) {
            for (x, y) in nv.iter().zip(cv) {
                let d = x - y;
                min_inc = min_inc.min(d);
                change = change.max(d.abs());
            }
        }
        min_increments.push(min_inc);
        std::mem::swap(&mut cur, &mut next);
        if change <= tol {
            return Ok((cur, iter, min_increments));
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, last_change: change })
}

/// Gap between the `(ε, a)` and `(0, a)` solutions together with the bound
/// `ε (K + ‖a‖₁ + φ_ε(t))`, `φ_ε(t) = ∫_0^t K e^{-1} / ‖z^ε(s)‖₁ ds`.
#[derive(Debug, Clone)]
pub struct EpsilonGap {
    pub grid: Vec<f64>,
    pub gap: Vec<f64>,
    pub bound: Vec<f64>,
    pub phi: Vec<f64>,
    /// The `(ε, a)` solution itself.
    pub solution: FluidTrajectory,
}

pub fn epsilon_gap_bound(
    model: &ValidatedModel,
    a: &[f64],
    epsilon: f64,
    t_max: f64,
    dt: f64,
) -> Result<EpsilonGap> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let k = model.classes() as f64;
    let with_eps = picard_solve(model, &PicardConfig::new(epsilon, a.to_vec(), dt, t_max))?.trajectory;
    let without = picard_solve(model, &PicardConfig::new(0.0, a.to_vec(), dt, t_max))?.trajectory;

    let a_norm: f64 = a.iter().sum();
    let norms = with_eps.norms();
    let mut phi = Vec::with_capacity(norms.len());
    let mut acc = 0.0;
    phi.push(0.0);
    for w in norms.windows(2) {
        acc += 0.5 * dt * k * E_INV * (1.0 / w[0] + 1.0 / w[1]);
        phi.push(acc);
    }
    let gap = with_eps
        .values
        .iter()
        .zip(&without.values)
        .map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum())
        .collect();
    let bound = phi.iter().map(|&f| epsilon * (k + a_norm + f)).collect();
    Ok(EpsilonGap { grid: with_eps.grid.clone(), gap, bound, phi, solution: with_eps })
}
