use std::path::PathBuf;

use sgq_core::pipeline::{run_with, Mode, Module, PipelineConfig, PipelineError, StepStatus, Tolerances};

fn config(name: &str) -> PipelineConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    PipelineConfig::from_json_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn check(cfg: &PipelineConfig) -> sgq_core::pipeline::Outcome {
    run_with(cfg, Mode::Check { only: None }, Tolerances::default()).unwrap()
}

#[test]
fn shipped_configs_pass() {
    for name in [
        "constant.json",
        "torus-horizontal.json",
        "torus-weinstein.json",
        "t-star-s1.json",
        "torus-bundle.json",
        "abelian-action.json",
        "connes-landi-relations.json",
    ] {
        let out = check(&config(name));
        assert_eq!(out.exit_code(), 0, "{name}: {}", out.report.render());
    }
}

#[test]
fn reports_are_byte_identical() {
    let cfg = config("torus-horizontal.json");
    let a = run_with(&cfg, Mode::Quantize, Tolerances::default()).unwrap().report.render();
    let b = run_with(&cfg, Mode::Quantize, Tolerances::default()).unwrap().report.render();
    assert_eq!(a, b);
}

/// The horizontal reduction and the Weinstein reduction of the same torus
/// carry the same generator relation.
#[test]
fn two_polarizations_agree_on_the_relation() {
    let h = check(&config("torus-horizontal.json")).report.to_json();
    let w = check(&config("torus-weinstein.json")).report.to_json();
    let b10 = h["steps"][4]["data"]["B"][1][0].as_str().unwrap().to_string();
    assert_eq!(b10, "1/3");
    let turns = w["steps"][4]["data"]["crossed_product"]["relation_turns"].as_str().unwrap();
    // uv = e^{2πit} vu with t = −B₁₀ mod 1
    assert_eq!(turns, "2/3");
    assert_eq!(w["steps"][4]["data"]["lattice_relation_turns"], turns);
}

#[test]
fn failed_adaptedness_skips_later_steps() {
    let text = r#"{"name": "bad", "poisson": {"kind": "constant", "dim": 2, "data": [[0, 1], [-1, 0]]},
        "groupoid": {"kind": "linear"}, "potential": {"kind": "y_dx"}, "polarization": {"kind": "horizontal"}}"#;
    let out = check(&PipelineConfig::from_json_str(text).unwrap());
    assert_eq!(out.exit_code(), 1);
    let r = &out.report;
    assert_eq!(r.step("checked").unwrap().status, StepStatus::Failed);
    for s in ["derived", "reduced", "constructed"] {
        assert_eq!(r.step(s).unwrap().status, StepStatus::Skipped);
    }
}

#[test]
fn only_restricts_checks() {
    let cfg = config("torus-horizontal.json");
    let out = run_with(&cfg, Mode::Check { only: Some(Module::Groupoid) }, Tolerances::default()).unwrap();
    assert!(out.report.checks().count() > 0);
    assert!(out.report.checks().all(|c| c.module == Module::Groupoid));
}

#[test]
fn sweep_produces_order_two() {
    let out = run_with(&config("torus-horizontal.json"), Mode::Sweep, Tolerances::default()).unwrap();
    let s = out.sweep.unwrap();
    assert!((s.fitted_order.unwrap() - 2.0).abs() < 0.1);
    let mut csv = Vec::new();
    s.write_csv(&mut csv).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("hbar,error,method,R,fitted_order"));
}

#[test]
fn error_classes() {
    let bad_kind = r#"{"name": "x", "poisson": {"kind": "constant", "dim": 2, "data": [[0, 1], [-1, 0]]},
        "groupoid": {"kind": "holonomy"}, "potential": {"kind": "minus_x_dy"}, "polarization": {"kind": "horizontal"}}"#;
    assert!(matches!(PipelineConfig::from_json_str(bad_kind), Err(PipelineError::Unsupported(_))));
    assert!(matches!(PipelineConfig::from_json_str("{\"name\": 3}"), Err(PipelineError::Schema(_))));
    assert!(matches!(PipelineConfig::from_json_str("not json"), Err(PipelineError::Schema(_))));
}
