use std::fs;

use proptest::prelude::*;
use zitter_core::cone::{AcState, ConeContext, Sheet};
use zitter_core::field::ComplexField;
use zitter_core::harness::{
    check_causal_evolution, default_family, run_experiment, ExperimentConfig, EXIT_FAIL,
};
use zitter_core::spacetime::{Event, Region, Resolution};

fn small_evolution(scenario: &str, extra: &str) -> ExperimentConfig {
    let text = format!(
        "scenario = \"{scenario}\"\nseed = 5\n[grid]\nL = 100.0\nN = 1024\n[packet]\nsigma = 5.0\n\
         [evolve]\ndt = 0.02\nsteps = 600\n[verify]\nsample_every = 20\nrandom_members = 6\n{extra}"
    );
    ExperimentConfig::from_toml(&text).unwrap()
}

fn ctx() -> ConeContext {
    ConeContext::new(
        Region::new(0.0, 4.0, -4.0, 4.0).unwrap(),
        Resolution::new(9, 17),
        ComplexField::constant(num_complex::Complex64::new(0.0, 1.3)),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn same_sheet_point_flows_are_monotone(
        seed in 0u64..1000,
        steps in prop::collection::vec((0.0..0.4f64, -1.0..1.0f64), 1..10),
        plus in any::<bool>(),
    ) {
        let ctx = ctx();
        let family = default_family(seed, &ctx, 1.3, 6).unwrap();
        let sheet = if plus { Sheet::Plus } else { Sheet::Minus };
        let mut e = Event::new(0.0, 0.0);
        let mut states = vec![AcState::pure(e, sheet)];
        for (dt, slope) in steps {
            e = Event::new(e.t + dt, e.x + slope * dt);
            states.push(AcState::pure(e, sheet));
        }
        let report = check_causal_evolution(&states, &family, &ctx, 1e-9).unwrap();
        prop_assert!(report.is_monotone(), "{:?}", report.violations);
    }
}

#[test]
fn free_zitter_reports_the_period() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_experiment(&small_evolution("free_zitter", ""), dir.path()).unwrap();
    assert!(s.passed, "{:?}", s.checks);
    let period = s.metrics["chirality_period"].as_f64().unwrap();
    assert!((period - std::f64::consts::PI).abs() < 0.02 * std::f64::consts::PI);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["scenario"], "free_zitter");
    assert_eq!(summary["threads"], 1);
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn positive_energy_passes_both_checks() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_experiment(&small_evolution("positive_energy", ""), dir.path()).unwrap();
    let names: Vec<&str> = s.checks.iter().map(|c| c.name.as_str()).collect();
    assert!(names.contains(&"amplitude_ratio") && names.contains(&"causal_violations"));
    assert!(s.passed, "{:?}", s.checks);
}

#[test]
fn reports_are_byte_identical() {
    let cfg = small_evolution("yukawa_field", "[fields.yukawa]\nim = 1.0\namplitude = 0.3\nk = 0.2\nomega = 0.5\n[output]\nsnapshot = true\npairings = true\n");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let sa = run_experiment(&cfg, a.path()).unwrap();
    run_experiment(&cfg, b.path()).unwrap();
    for name in &sa.artifacts {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn causal_decide_matches_closed_form() {
    let cfg = ExperimentConfig::from_toml(
        "scenario = \"causal_decide\"\n[decide]\ncells_t = 20\ncells_x = 20\n",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let s = run_experiment(&cfg, dir.path()).unwrap();
    assert!(s.passed, "{:?}", s.checks);
    let table = fs::read_to_string(dir.path().join("decisions.csv")).unwrap();
    assert_eq!(table.lines().count(), 401);
}

#[test]
fn cone_audit_reports_a_witness() {
    let cfg = ExperimentConfig::from_toml(
        "scenario = \"cone_audit\"\n[cone]\nelement = \"space\"\nexpect = \"violation\"\n",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let s = run_experiment(&cfg, dir.path()).unwrap();
    assert!(s.passed);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("membership.json")).unwrap())
            .unwrap();
    assert_eq!(m["verdict"], "violation");
    assert!(m["witness"]["eigenvalues"][0].as_f64().unwrap() < 0.0);

    let cfg = ExperimentConfig::from_toml(
        "scenario = \"cone_audit\"\n[cone]\nelement = \"space\"\nexpect = \"member\"\n",
    )
    .unwrap();
    let s = run_experiment(&cfg, dir.path()).unwrap();
    assert_eq!(s.exit_code(), EXIT_FAIL);
}

#[test]
fn optimize_checks_the_oracle() {
    let cfg =
        ExperimentConfig::from_toml("scenario = \"optimize\"\n[optimize]\nomega_bump = 0.3\n")
            .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let s = run_experiment(&cfg, dir.path()).unwrap();
    assert!(s.passed, "{:?}", s.checks);
    assert!(dir.path().join("curve.csv").exists());
}
