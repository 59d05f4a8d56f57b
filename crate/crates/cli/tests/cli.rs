use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn zitter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zitter"))
        .args(args)
        .output()
        .unwrap()
}

fn run(command: &str, config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![
        command,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    zitter(&args)
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

const SMALL: &str =
    "scenario = \"free_zitter\"\n[grid]\nL = 100.0\nN = 1024\n[packet]\nsigma = 5.0\n\
                     [evolve]\nsteps = 600\n[verify]\nsample_every = 30\nrandom_members = 4\n";

#[test]
fn simulate_passes_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("simulate", SMALL, dir.path(), &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = summary(dir.path());
    assert_eq!(s["passed"], true);
    assert_eq!(s["scenario"], "free_zitter");
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("verify-evolution", SMALL, dir.path(), &["--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(summary(dir.path())["seed"], 42);
}

#[test]
fn quantitative_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "scenario = \"cone_audit\"\n[cone]\nelement = \"space\"\nexpect = \"member\"\n";
    let out = run("cone-audit", cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(summary(dir.path())["passed"], false);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        "simulate",
        "scenario = \"free_zitter\"\n[grid]\nL = 200.0\nN = 100\n",
        dir.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.N"));

    let out = run("causal", SMALL, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));

    let out = zitter(&[
        "simulate",
        "--config",
        "/nonexistent.toml",
        "--out",
        "/tmp/unused",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn causal_and_optimize_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        "causal",
        "scenario = \"causal_decide\"\n[decide]\ncells_t = 10\ncells_x = 10\n",
        dir.path(),
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("out/decisions.csv").exists());

    let dir = tempfile::tempdir().unwrap();
    let out = run("optimize", "scenario = \"optimize\"\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(summary(dir.path())["metrics"]["value"].as_f64().unwrap() >= 2.0);
}
