//! Run configuration: a JSON document with a `model` and one `experiment` block.
//!
//! ```json
//! {
//!   "model": { "lambda": [0.5, 0.5], "p": [1.0, 0.5] },
//!   "experiment": { "converge": { "R_ladder": [200, 1000], "reps": 20, "t_max": 5.0, "z0": [0, 0] } }
//! }
//! ```

use aloha_fluid::simulator::RenegingSampler;
use aloha_fluid::{ArrivalSpec, Error, ModelParams, Result, ValidatedModel};
use serde::{Deserialize, Serialize};

/// Model block. `arrival` defaults to independent Poisson arrivals with rates
/// `lambda`; for categorical arrivals `lambda` may be omitted and is derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival: Option<ArrivalSpec>,
}

impl ModelSpec {
    pub fn into_params(self) -> Result<ModelParams> {
        match (self.lambda, self.arrival) {
            (Some(lambda), None) => Ok(ModelParams::poisson(lambda, self.p)),
            (Some(lambda), Some(arrival)) => Ok(ModelParams { lambda, p: self.p, arrival }),
            (None, Some(arrival @ ArrivalSpec::Categorical { .. })) => {
                Ok(ModelParams { lambda: arrival.mean(), p: self.p, arrival })
            }
            (None, Some(arrival @ ArrivalSpec::Poisson { .. })) => {
                Ok(ModelParams { lambda: arrival.mean(), p: self.p, arrival })
            }
            (None, None) => Err(Error::Parse("model: missing field `lambda`".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RenegingChoice {
    #[default]
    PerCustomer,
    Binomial,
}

impl From<RenegingChoice> for RenegingSampler {
    fn from(c: RenegingChoice) -> Self {
        match c {
            RenegingChoice::PerCustomer => RenegingSampler::PerCustomer,
            RenegingChoice::Binomial => RenegingSampler::Binomial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Simulate {
        #[serde(rename = "R", alias = "r")]
        r: f64,
        /// Number of slots; exactly one of `horizon` and `t_max` is required.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_max: Option<f64>,
        z0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default)]
        reneging: RenegingChoice,
    },
    Fluid {
        z0: Vec<f64>,
        t_max: f64,
        dt: f64,
    },
    Equilibrium {},
    Converge {
        #[serde(rename = "R_ladder", alias = "r_ladder")]
        r_ladder: Vec<f64>,
        reps: usize,
        t_max: f64,
        #[serde(default = "default_grid_step")]
        grid_step: f64,
        z0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Validate {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

fn default_grid_step() -> f64 {
    0.01
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Simulate { .. } => "simulate",
            Experiment::Fluid { .. } => "fluid",
            Experiment::Equilibrium {} => "equilibrium",
            Experiment::Converge { .. } => "converge",
            Experiment::Validate { .. } => "validate",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Experiment::Simulate { seed, .. }
            | Experiment::Converge { seed, .. }
            | Experiment::Validate { seed } => *seed,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: ModelSpec,
    experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ValidatedModel,
    pub experiment: Experiment,
}

/// Parses and validates a config document. Syntax and schema problems are
/// `Error::Parse`; model and range problems keep their domain error.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let model = raw.model.into_params()?.validate()?;
    check_experiment(&raw.experiment, model.classes())?;
    Ok(RunConfig { model, experiment: raw.experiment })
}

fn check_experiment(exp: &Experiment, k: usize) -> Result<()> {
    let check_z0 = |z0: &[f64]| -> Result<()> {
        if z0.len() != k {
            return Err(Error::DimensionMismatch(format!("z0 has {} entries, model has {k} classes", z0.len())));
        }
        if z0.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidArgument("z0 must be finite and nonnegative".into()));
        }
        Ok(())
    };
    let positive = |name: &str, x: f64| -> Result<()> {
        if x.is_finite() && x > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {x}")))
        }
    };
    match exp {
        Experiment::Simulate { r, horizon, t_max, z0, .. } => {
            positive("R", *r)?;
            check_z0(z0)?;
            match (horizon, t_max) {
                (Some(_), None) => Ok(()),
                (None, Some(t)) => positive("t_max", *t),
                _ => Err(Error::InvalidArgument("simulate needs exactly one of horizon and t_max".into())),
            }
        }
        Experiment::Fluid { z0, t_max, dt } => {
            check_z0(z0)?;
            positive("t_max", *t_max)?;
            positive("dt", *dt)
        }
        Experiment::Equilibrium {} | Experiment::Validate { .. } => Ok(()),
        Experiment::Converge { r_ladder, reps, t_max, grid_step, z0, .. } => {
            check_z0(z0)?;
            positive("t_max", *t_max)?;
            positive("grid_step", *grid_step)?;
            if *reps == 0 {
                return Err(Error::InvalidArgument("reps must be at least 1".into()));
            }
            for &r in r_ladder {
                positive("R", r)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_class_config_parses() {
        let cfg = parse_config(
            r#"{"model": {"lambda": [0.5, 0.5], "p": [1.0, 0.5]},
                "experiment": {"fluid": {"z0": [0, 0], "t_max": 2.0, "dt": 0.01}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.model.classes(), 2);
        assert_eq!(cfg.experiment.name(), "fluid");
    }

    #[test]
    fn categorical_lambda_is_derived() {
        let cfg = parse_config(
            r#"{"model": {"p": [1.0],
                          "arrival": {"kind": "categorical", "support": [[0], [2]], "probs": [0.5, 0.5]}},
                "experiment": {"equilibrium": {}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.model.lambda(), &[1.0]);
    }

    #[test]
    fn underloaded_model_names_the_assumption() {
        let err = parse_config(
            r#"{"model": {"lambda": [0.1, 0.2], "p": [1.0, 1.0]}, "experiment": {"equilibrium": {}}}"#,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let msg = err.to_string();
        assert!(msg.contains("assumption 2"), "{msg}");
        assert!(msg.contains("exceeds the stability threshold"), "{msg}");
    }

    #[test]
    fn missing_p_is_a_parse_error_naming_the_field() {
        let err = parse_config(r#"{"model": {"lambda": [1.0]}, "experiment": {"equilibrium": {}}}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("`p`"), "{err}");
    }

    #[test]
    fn two_experiment_blocks_are_rejected() {
        let err = parse_config(
            r#"{"model": {"lambda": [1.0], "p": [1.0]},
                "experiment": {"equilibrium": {}, "validate": {}}}"#,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn simulate_needs_one_horizon() {
        let base = r#"{"model": {"lambda": [1.0], "p": [1.0]}, "experiment": {"simulate": "#;
        let both = format!(r#"{base}{{"R": 10, "horizon": 5, "t_max": 1.0, "z0": [0]}}}}}}"#);
        assert_eq!(parse_config(&both).unwrap_err().exit_code(), 1);
        let ok = format!(r#"{base}{{"R": 10, "t_max": 1.0, "z0": [0], "reneging": "binomial"}}}}}}"#);
        assert!(parse_config(&ok).is_ok());
    }

    #[test]
    fn z0_dimension_is_checked() {
        let err = parse_config(
            r#"{"model": {"lambda": [1.0], "p": [1.0]},
                "experiment": {"fluid": {"z0": [0, 0], "t_max": 1.0, "dt": 0.1}}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }
}
