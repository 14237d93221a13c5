use std::process::Command;

use atl::IfSystem;

const BIN: &str = env!("CARGO_BIN_EXE_atl");

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn usage_and_input_errors_exit_three() {
    assert_eq!(run(&["check", "domination", "--ifs", "/nonexistent/system.json"]).0, 3);
    assert_eq!(run(&["check", "domination", "--no-such-flag"]).0, 3);
    assert_eq!(run(&["frobnicate"]).0, 3);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["check", "estimate", "render", "example"] {
        assert!(out.contains(sub), "help lists {sub}");
    }
}

#[test]
fn check_verdicts() {
    assert_eq!(run(&["check", "domination", "--system", "dominated3"]).0, 0);
    assert_eq!(run(&["check", "domination", "--system", "square"]).0, 1);
    assert_eq!(run(&["check", "separation", "--system", "dominated3"]).0, 0);
    assert_eq!(run(&["check", "projection", "--system", "dominated3"]).0, 0);
    assert_eq!(run(&["check", "projection", "--system", "carpet_missing_col"]).0, 1);
    assert_eq!(run(&["check", "irreducibility", "--system", "dominated3"]).0, 0);
    assert_eq!(run(&["check", "irreducibility", "--system", "carpet23"]).0, 1);
}

#[test]
fn violated_parameters_are_named() {
    let (code, _, err) = run(&["example", "paper4", "--lambda", "0.4"]);
    assert_eq!(code, 1);
    assert!(err.contains("(i)"), "{err}");
}

#[test]
fn example_systems_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("carpet.json");
    let p = path.to_str().unwrap();
    let (code, _, _) = run(&["example", "carpet", "--m", "2", "--n", "4", "--cells", "0,0;1,1;0,3", "--out", p]);
    assert_eq!(code, 0);
    let sys = IfSystem::load(&path).unwrap();
    assert_eq!(sys.len(), 3);
    assert_eq!(run(&["check", "domination", "--ifs", p]).0, 0);

    let (code, out, _) = run(&["example", "paper4"]);
    assert_eq!(code, 0);
    let sys = IfSystem::from_json(&out).unwrap();
    assert_eq!(sys.matrices(), atl::systems::dominated3().matrices());
}

#[test]
fn json_envelope() {
    let (code, out, _) = run(&["estimate", "entropy", "--system", "carpet23"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    for key in ["version", "timestamp", "config", "report"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["config"].get("threads").is_none());
}

#[test]
fn csv_output() {
    let (code, out, _) = run(&["estimate", "furstenberg", "--system", "diag2", "--samples", "10", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.lines().count() >= 10, "{out}");
}
