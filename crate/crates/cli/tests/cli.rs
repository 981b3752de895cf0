use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_galois-points"))
        .args(args)
        .output()
        .expect("spawn binary");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn list_shows_builtins() {
    let (code, out, _) = run(&["list"]);
    assert_eq!(code, 0);
    for name in ["gk", "hermitian", "fermat", "suzuki", "ree"] {
        assert!(out.contains(name), "missing {name} in:\n{out}");
    }
}

#[test]
fn explain_known_and_unknown() {
    let (code, out, _) = run(&["explain", "c"]);
    assert_eq!(code, 0);
    assert!(!out.trim().is_empty());
    let (code, _, _) = run(&["explain", "no-such-condition"]);
    assert_eq!(code, 2);
}

#[test]
fn param_violation_exits_two_with_json_error() {
    let (code, out, _) = run(&["verify", "gk", "--q", "2", "--h", "5", "--json"]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(&out).expect("json error body");
    assert_eq!(v["error"]["kind"], "ParamViolation");
}

#[test]
fn passing_scenario_exits_zero() {
    let (code, out, _) = run(&["verify", "hermitian", "--q", "2", "--s", "1"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("[PASS]"));
    assert!(!out.contains("[FAIL]"));
}

#[test]
fn perturbation_exits_one() {
    let (code, out, _) = run(&["verify", "hermitian", "--q", "3", "--perturb", "e"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("[FAIL]"));
}
