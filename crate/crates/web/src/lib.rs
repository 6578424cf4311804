//! Browser bindings: each exported function takes a model as JSON
//! (`{"lambda": [...], "p": [...]}`) and returns its result as a JSON string.

use aloha_fluid::fluid::{epsilon_gap_bound, equilibrium, integrate_fms, picard_solve, PicardConfig};
use aloha_fluid::simulator::{run_path, scaled_path};
use aloha_fluid::trajectory::uniform_grid;
use aloha_fluid::{IntegerState, ModelParams, ValidatedModel};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelInput {
    lambda: Vec<f64>,
    p: Vec<f64>,
}

fn parse_model(json: &str) -> Result<ValidatedModel, String> {
    let m: ModelInput = serde_json::from_str(json).map_err(|e| e.to_string())?;
    ModelParams::poisson(m.lambda, m.p).validate().map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub label: String,
    /// `values[n][i]`: class `i` at `grid[n]`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct FluidCurves {
    pub grid: Vec<f64>,
    pub z_e: Vec<f64>,
    pub curves: Vec<Curve>,
}

/// Fluid solutions from the origin and from `scale * z_e`, plus the equilibrium.
pub fn fluid_curves_data(model_json: &str, t_max: f64, scale: f64) -> Result<FluidCurves, String> {
    let model = parse_model(model_json)?;
    let z_e = equilibrium(&model).map_err(|e| e.to_string())?.z_e;
    let dt = 0.01;
    let starts = [
        ("from 0".to_string(), vec![0.0; model.classes()]),
        (format!("from {scale} z_e"), z_e.iter().map(|x| scale * x).collect()),
    ];
    let mut grid = Vec::new();
    let mut curves = Vec::new();
    for (label, z0) in starts {
        let traj = integrate_fms(&z0, &model, t_max, dt).map_err(|e| e.to_string())?.subsample(10);
        grid = traj.grid;
        curves.push(Curve { label, values: traj.values });
    }
    Ok(FluidCurves { grid, z_e, curves })
}

#[derive(Debug, Serialize)]
pub struct PathVsFluid {
    pub grid: Vec<f64>,
    pub scaled: Vec<Vec<f64>>,
    pub fluid: Vec<Vec<f64>>,
    pub sup_distance: f64,
}

/// One scaled simulated path from the empty system next to the fluid solution from 0.
pub fn path_vs_fluid_data(model_json: &str, r: f64, t_max: f64, seed: u64) -> Result<PathVsFluid, String> {
    let model = parse_model(model_json)?;
    let k = model.classes();
    let step = 0.01;
    let grid = uniform_grid(t_max, step);
    let t_end = *grid.last().unwrap_or(&0.0);
    let fluid = integrate_fms(&vec![0.0; k], &model, t_end, step / 10.0)
        .map_err(|e| e.to_string())?
        .subsample(10);
    let horizon = (r * t_max).ceil() as u64;
    let path = run_path(&model, r, horizon, &IntegerState::zeros(k), seed).map_err(|e| e.to_string())?;
    let scaled = scaled_path(&path, &grid).map_err(|e| e.to_string())?;
    let sup_distance = aloha_fluid::harness::sup_distance(&scaled, &fluid);
    Ok(PathVsFluid { grid, scaled: scaled.values, fluid: fluid.values, sup_distance })
}

#[derive(Debug, Serialize)]
pub struct EpsilonCurve {
    pub epsilon: f64,
    /// `‖z^ε(t)‖₁`.
    pub norm: Vec<f64>,
    /// `‖z^ε(t) - z^0(t)‖₁` and its bound.
    pub gap: Vec<f64>,
    pub bound: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct PicardFamily {
    pub grid: Vec<f64>,
    pub base_norm: Vec<f64>,
    pub curves: Vec<EpsilonCurve>,
}

/// The `(ε, p)` family of fixed points and the gap bound for each `ε`.
pub fn picard_family_data(model_json: &str, epsilons: &[f64], t_max: f64) -> Result<PicardFamily, String> {
    let model = parse_model(model_json)?;
    let dt = 0.01;
    let a = model.p().to_vec();
    let base = picard_solve(&model, &PicardConfig::new(0.0, a.clone(), dt, t_max))
        .map_err(|e| e.to_string())?
        .trajectory;
    let mut curves = Vec::new();
    for &eps in epsilons {
        let g = epsilon_gap_bound(&model, &a, eps, t_max, dt).map_err(|e| e.to_string())?;
        curves.push(EpsilonCurve { epsilon: eps, norm: g.solution.norms(), gap: g.gap, bound: g.bound });
    }
    Ok(PicardFamily { grid: base.grid.clone(), base_norm: base.norms(), curves })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn fluid_curves(model_json: &str, t_max: f64, scale: f64) -> Result<String, JsValue> {
    to_js(fluid_curves_data(model_json, t_max, scale))
}

#[wasm_bindgen]
pub fn path_vs_fluid(model_json: &str, r: f64, t_max: f64, seed: u32) -> Result<String, JsValue> {
    to_js(path_vs_fluid_data(model_json, r, t_max, u64::from(seed)))
}

#[wasm_bindgen]
pub fn picard_family(model_json: &str, epsilons: &[f64], t_max: f64) -> Result<String, JsValue> {
    to_js(picard_family_data(model_json, epsilons, t_max))
}
