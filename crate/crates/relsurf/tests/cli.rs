//! End-to-end checks of the command-line interface: exit codes, report
//! shapes, and byte determinism, driving the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relsurf"))
}

fn example_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/fr")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> &str {
    std::str::from_utf8(&o.stdout).expect("utf8 stdout")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn surfaces_lists_eight() {
    let out = run(&["surfaces"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(v["surfaces"].as_array().unwrap().len(), 8);
}

#[test]
fn state_by_name_and_pretty_rendering() {
    let out = run(&["state", "--surface", "S4"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(v["surface"]["name"], "S4");
    let pretty = run(&["--pretty", "state", "--surface", "S4"]);
    assert_eq!(code(&pretty), 0);
    assert!(stdout(&pretty).contains("state on S4"));
}

#[test]
fn unknown_surface_name_is_a_runtime_error() {
    let out = run(&["state", "--surface", "S9"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn consistency_of_named_surfaces() {
    let out = run(&["consistency", "S1", "S2"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(v["consistent"], true);
    let shared: Vec<&str> =
        v["shared_edges"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(shared, vec!["B'", "S''", "W"]);
}

#[test]
fn relstate_chain_reports_links_and_mixture() {
    let out = run(&["relstate", "--chain", "U',W'", "--input", "1"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(v["outcome"]["kind"], "mixed");
    assert_eq!(v["outcome"]["at"], 1);
    let eig = v["outcome"]["density"]["eigenvalues"].as_array().unwrap();
    assert!((eig[0].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn eval_reports_valuations() {
    let out = run(&["eval", "U_minus & W_minus"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(v["valuation"], "possible");
    let out = run(&["eval", "U_minus -> B_1"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(v["valuation"], "true");
    let out = run(&["eval", "W_plus & W_minus"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(v["valuation"], "false");
}

#[test]
fn eval_syntax_error_exits_2() {
    let out = run(&["eval", "U_minus &"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn deduce_fr_exits_5() {
    let out = run(&["deduce", "fr"]);
    assert_eq!(code(&out), 5);
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["soundness"]["verdict"], "unsound");
}

#[test]
fn fr_demo_is_deterministic_and_exits_5() {
    let a = run(&["fr-demo"]);
    let b = run(&["fr-demo"]);
    assert_eq!(code(&a), 5);
    assert_eq!(a.stdout, b.stdout, "fr-demo output is not byte-deterministic");
}

#[test]
fn fr_demo_from_files_matches_builtin_byte_for_byte() {
    let dir = example_dir();
    let builtin = run(&["fr-demo"]);
    let from_files = run(&[
        "--circuit",
        dir.join("circuit.json").to_str().unwrap(),
        "--atoms",
        dir.join("atoms.json").to_str().unwrap(),
        "--deductions",
        dir.join("deductions.txt").to_str().unwrap(),
        "fr-demo",
    ]);
    assert_eq!(code(&from_files), 5);
    assert_eq!(builtin.stdout, from_files.stdout);
}

fn write_temp(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("relsurf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn malformed_circuit_json_exits_2() {
    let path = write_temp("broken.json", "{ not json");
    let out = run(&["--circuit", path.to_str().unwrap(), "surfaces"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("parse error"), "{err}");
}

#[test]
fn dimension_mismatch_exits_3() {
    let path = write_temp(
        "mismatch.json",
        r#"{
            "edges": [{"id": "q", "dim": 2}, {"id": "q'", "dim": 3}],
            "vertices": [{"id": "v", "in": ["q"], "out": ["q'"], "gate": {"kind": "identity"}}],
            "initial": {"product": [{"edge": "q", "amplitudes": [[1, 0], [0, 0]]}]}
        }"#,
    );
    let out = run(&["--circuit", path.to_str().unwrap(), "surfaces"]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("product of input dimensions"), "{err}");
}

#[test]
fn deduction_with_undeclared_atom_exits_2() {
    let dir = example_dir();
    let bad = write_temp("bad_dedu.txt", "deduction d\npremises:\n  GHOST\n");
    let out = run(&[
        "--circuit",
        dir.join("circuit.json").to_str().unwrap(),
        "--atoms",
        dir.join("atoms.json").to_str().unwrap(),
        "--deductions",
        bad.to_str().unwrap(),
        "deduce",
        "d",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn invalid_deduction_step_exits_4() {
    let dir = example_dir();
    // Modus ponens with the antecedents swapped is not schema-valid.
    let bad = write_temp(
        "invalid_step.txt",
        "deduction broken\npremises:\n  U_minus\n  U_minus -> B_1\nstep 4 from 2, 1: B_1\n",
    );
    let out = run(&[
        "--circuit",
        dir.join("circuit.json").to_str().unwrap(),
        "--atoms",
        dir.join("atoms.json").to_str().unwrap(),
        "--deductions",
        bad.to_str().unwrap(),
        "deduce",
        "broken",
    ]);
    assert_eq!(code(&out), 4, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(v["valid"], false);
}

#[test]
fn sound_single_surface_deduction_exits_0() {
    let dir = example_dir();
    let good = write_temp(
        "sound.txt",
        "deduction tautology\npremises:\n  W_plus\n  W_plus -> W_plus\nstep 4 from 1, 2: W_plus\n",
    );
    let out = run(&[
        "--circuit",
        dir.join("circuit.json").to_str().unwrap(),
        "--atoms",
        dir.join("atoms.json").to_str().unwrap(),
        "--deductions",
        good.to_str().unwrap(),
        "deduce",
        "tautology",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(v["soundness"]["verdict"], "sound");
    assert_eq!(v["soundness"]["single_surface"], true);
}

#[test]
fn atoms_flag_requires_circuit() {
    let out = bin()
        .args(["--atoms", Path::new("x.json").to_str().unwrap(), "surfaces"])
        .output()
        .unwrap();
    assert_ne!(code(&out), 0);
}
