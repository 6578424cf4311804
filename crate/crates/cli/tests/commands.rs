use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aloha-fluid"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.json");
    fs::write(&path, text).unwrap();
    path
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn equilibrium_single_class() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": {"lambda": [1.0], "p": [1.0]}, "experiment": {"equilibrium": {}}}"#,
    );
    let out = run("equilibrium", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("equilibrium.json")).unwrap()).unwrap();
    let z = json["z_e"][0].as_f64().unwrap();
    assert!((z - 0.632_121).abs() < 1e-6, "{z}");
    assert!(json["residual"].as_f64().unwrap() <= 1e-9);
    assert!(json["x_root"].is_number());
}

#[test]
fn converge_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": {"lambda": [0.5, 0.5], "p": [1.0, 0.5]},
            "experiment": {"converge": {"R_ladder": [20, 50], "reps": 4, "t_max": 1.0, "z0": [0, 0]}}}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run("converge", &cfg, &a, &["--seed", "11"]).status.code(), Some(0));
    assert_eq!(run("converge", &cfg, &b, &["--seed", "11"]).status.code(), Some(0));
    let ta = fs::read(a.join("converge.csv")).unwrap();
    assert_eq!(ta, fs::read(b.join("converge.csv")).unwrap());
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("R,reps,mean_sup_dist,max_sup_dist,std_sup_dist\n"));
    assert_eq!(text.lines().count(), 3);

    let c = dir.path().join("c");
    assert_eq!(run("converge", &cfg, &c, &["--seed", "12"]).status.code(), Some(0));
    assert_ne!(text, fs::read_to_string(c.join("converge.csv")).unwrap());
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let with_seed = |s: u64| {
        format!(
            r#"{{"model": {{"lambda": [0.5, 0.5], "p": [1.0, 0.5]}},
                "experiment": {{"simulate": {{"R": 50, "horizon": 200, "z0": [0, 0], "seed": {s}}}}}}}"#
        )
    };
    let cfg3 = write_config(dir.path(), &with_seed(3));
    run("simulate", &cfg3, &dir.path().join("cfg3"), &[]);
    let cfg4 = dir.path().join("four.json");
    fs::write(&cfg4, with_seed(4)).unwrap();
    run("simulate", &cfg4, &dir.path().join("flag3"), &["--seed", "3"]);
    let a = fs::read_to_string(dir.path().join("cfg3/path.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("flag3/path.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 202);
}

#[test]
fn validate_lists_passing_suites() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": {"lambda": [0.3, 0.3, 0.2], "p": [1.0, 0.5, 0.2]}, "experiment": {"validate": {}}}"#,
    );
    let out = run("validate", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("validate.txt")).unwrap();
    assert!(text.lines().count() >= 8);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}

#[test]
fn fluid_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": {"lambda": [1.0], "p": [1.0]},
            "experiment": {"fluid": {"z0": [0], "t_max": 1.0, "dt": 0.01}}}"#,
    );
    assert_eq!(run("fluid", &cfg, dir.path(), &[]).status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("fluid.csv")).unwrap();
    assert!(text.starts_with("t,z_1\n"));
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");

    let missing_p = write_config(dir.path(), r#"{"model": {"lambda": [1.0]}, "experiment": {"equilibrium": {}}}"#);
    let out = run("equilibrium", &missing_p, &out_dir, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`p`"));

    let underloaded = write_config(
        dir.path(),
        r#"{"model": {"lambda": [0.1, 0.2], "p": [1.0, 1.0]}, "experiment": {"equilibrium": {}}}"#,
    );
    let out = run("equilibrium", &underloaded, &out_dir, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the stability threshold"));

    let eq = write_config(dir.path(), r#"{"model": {"lambda": [1.0], "p": [1.0]}, "experiment": {"equilibrium": {}}}"#);
    assert_eq!(run("fluid", &eq, &out_dir, &[]).status.code(), Some(2));
    assert_eq!(run("equilibrium", &eq, &out_dir, &["--seed", "x"]).status.code(), Some(2));

    let too_coarse = write_config(
        dir.path(),
        r#"{"model": {"lambda": [0.4], "p": [1.0]}, "experiment": {"fluid": {"z0": [5.0], "t_max": 10.0, "dt": 5.0}}}"#,
    );
    assert_eq!(run("fluid", &too_coarse, &out_dir, &[]).status.code(), Some(3));
    assert!(!out_dir.join("fluid.csv").exists());

    assert_eq!(bin().arg("equilibrium").output().unwrap().status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["equilibrium", "simulate", "fluid", "converge", "validate"] {
        let text = fs::read_to_string(root.join(format!("{name}.json"))).unwrap();
        let cfg = aloha_fluid_cli::parse_config(&text).unwrap();
        assert_eq!(cfg.experiment.name(), name);
    }
}
