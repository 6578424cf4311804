//! Command-line front end: reads a run config, runs one experiment and writes
//! its artifact into the output directory.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use aloha_fluid::fluid::{equilibrium, integrate_fms};
use aloha_fluid::harness::{convergence_experiment, format_suites, run_validation, ConvergenceParams};
use aloha_fluid::rng::{RngPlan, DEFAULT_SEED};
use aloha_fluid::simulator::{run_path_with, PathOptions};
use aloha_fluid::{Error, IntegerState, Result};
use clap::{Parser, Subcommand};

pub use config::{parse_config, Experiment, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "aloha-fluid", version, about = "Multiclass slotted ALOHA with impatience: simulation and fluid limits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Master seed, or `random` for a fresh one. Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<SeedArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Simulate one path; writes path.csv.
    Simulate,
    /// Integrate the fluid model; writes fluid.csv.
    Fluid,
    /// Solve for the equilibrium point; writes equilibrium.json.
    Equilibrium,
    /// Run the convergence ladder; writes converge.csv.
    Converge,
    /// Run the invariant suites; writes validate.txt.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Fluid => "fluid",
            Command::Equilibrium => "equilibrium",
            Command::Converge => "converge",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedArg {
    Fixed(u64),
    Random,
}

impl std::str::FromStr for SeedArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "random" {
            return Ok(SeedArg::Random);
        }
        s.parse().map(SeedArg::Fixed).map_err(|_| format!("expected an unsigned integer or `random`, got {s:?}"))
    }
}

/// Seed resolution: flag, then config, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<SeedArg>, config: Option<u64>) -> u64 {
    match flag {
        Some(SeedArg::Fixed(s)) => s,
        Some(SeedArg::Random) => rand::random(),
        None => config.unwrap_or(DEFAULT_SEED),
    }
}

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial artifact.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| Error::Io(e.error))?;
    Ok(target)
}

/// Runs the experiment in `cfg` and writes its artifact. Returns the artifact
/// path; a validation run with a failing suite still writes the report but
/// returns an error.
pub fn dispatch(cfg: &RunConfig, out_dir: &Path, seed: u64) -> Result<PathBuf> {
    let model = &cfg.model;
    match &cfg.experiment {
        Experiment::Simulate { r, horizon, t_max, z0, reneging, .. } => {
            let horizon = match (horizon, t_max) {
                (Some(h), _) => *h,
                (None, Some(t)) => (r * t).ceil() as u64,
                (None, None) => unreachable!("checked by parse_config"),
            };
            let opts = PathOptions { plan: RngPlan::new(seed), replication: 0, reneging: (*reneging).into() };
            let path = run_path_with(model, *r, horizon, &IntegerState::from_fluid(z0, *r), opts)?;
            write_atomic(out_dir, "path.csv", path.to_csv().as_bytes())
        }
        Experiment::Fluid { z0, t_max, dt } => {
            let traj = integrate_fms(z0, model, *t_max, *dt)?;
            write_atomic(out_dir, "fluid.csv", traj.to_csv().as_bytes())
        }
        Experiment::Equilibrium {} => {
            let eq = equilibrium(model)?;
            let mut text = serde_json::to_string_pretty(&eq).map_err(|e| Error::NumericFailure(e.to_string()))?;
            text.push('\n');
            write_atomic(out_dir, "equilibrium.json", text.as_bytes())
        }
        Experiment::Converge { r_ladder, reps, t_max, grid_step, z0, .. } => {
            let params = ConvergenceParams {
                z0: z0.clone(),
                r_ladder: r_ladder.clone(),
                reps: *reps,
                t_max: *t_max,
                grid_step: *grid_step,
                seed,
            };
            let report = convergence_experiment(model, &params)?;
            write_atomic(out_dir, "converge.csv", report.to_csv().as_bytes())
        }
        Experiment::Validate { .. } => {
            let suites = run_validation(model, seed)?;
            let target = write_atomic(out_dir, "validate.txt", format_suites(&suites).as_bytes())?;
            let failed: Vec<&str> = suites.iter().filter(|s| !s.passed).map(|s| s.name).collect();
            if failed.is_empty() {
                Ok(target)
            } else {
                Err(Error::InvalidArgument(format!("failed suites: {}", failed.join(", "))))
            }
        }
    }
}

/// Full command execution; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match try_run(cli) {
        Ok(path) => {
            println!("{}", path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn try_run(cli: &Cli) -> Result<PathBuf> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Parse("--config PATH is required".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
    let cfg = parse_config(&text)?;
    if cfg.experiment.name() != cli.command.name() {
        return Err(Error::Parse(format!(
            "subcommand `{}` does not match the config's `{}` experiment block",
            cli.command.name(),
            cfg.experiment.name()
        )));
    }
    let seed = resolve_seed(cli.seed, cfg.experiment.seed());
    if cli.seed == Some(SeedArg::Random) {
        eprintln!("seed: {seed}");
    }
    dispatch(&cfg, &cli.out, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(SeedArg::Fixed(3)), Some(9)), 3);
        assert_eq!(resolve_seed(None, Some(9)), 9);
        assert_eq!(resolve_seed(None, None), DEFAULT_SEED);
        assert_eq!("random".parse::<SeedArg>().unwrap(), SeedArg::Random);
        assert!("-1".parse::<SeedArg>().is_err());
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.txt", b"one").unwrap();
        write_atomic(dir.path(), "a.txt", b"two").unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("a.txt")).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
