//! End-to-end checks of the command-line interface: output formats, exit
//! codes, and byte-for-byte determinism of file outputs.

use std::path::{Path, PathBuf};
use std::process::Command;

use orbitile::solver::{ForbiddenPattern, InstanceEdge, PatchInstance};
use orbitile::substitution::{Substitution, SubstitutionSpec};
use orbitile::surface::ring_substitution;

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_orbitile"))
        .args(args)
        .output()
        .expect("spawn the cli");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().expect("no exit code"),
    )
}

fn write_spec(dir: &Path, name: &str, sub: &Substitution) -> PathBuf {
    let path = dir.join(name);
    let spec = SubstitutionSpec::from_parts(sub, None);
    std::fs::write(&path, serde_json::to_vec_pretty(&spec).unwrap()).unwrap();
    path
}

fn doubling(dir: &Path) -> PathBuf {
    write_spec(dir, "doubling.json", &Substitution::binary_doubling())
}

#[test]
fn eig_prints_expansion_and_attaches_it() {
    let dir = tempfile::tempdir().unwrap();
    let spec = doubling(dir.path());
    let out = dir.path().join("with-exp.json");
    let (stdout, _, code) = run(&[
        "eig",
        "--input",
        spec.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("lambda = 2.000000000000"), "stdout: {stdout}");
    assert!(stdout.contains("v(0) = 1.000000000000"), "stdout: {stdout}");
    let back: SubstitutionSpec =
        serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let exp = back.expansion.expect("expansion attached");
    assert!((exp.lambda - 2.0).abs() < 1e-12);
}

#[test]
fn expand_applies_the_rules() {
    let dir = tempfile::tempdir().unwrap();
    let spec = doubling(dir.path());
    let (stdout, _, code) =
        run(&["expand", "--input", spec.to_str().unwrap(), "--word", "0", "--steps", "3"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "00000000");
}

#[test]
fn expand_rejects_foreign_letters() {
    let dir = tempfile::tempdir().unwrap();
    let spec = doubling(dir.path());
    let (_, stderr, code) =
        run(&["expand", "--input", spec.to_str().unwrap(), "--word", "x"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

#[test]
fn ball_stats_prints_ring_sizes() {
    let (stdout, _, code) = run(&["ball", "--radius", "2", "--stats"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("|C_1|=48, |C_2|=1632"), "stdout: {stdout}");
    assert!(stdout.contains("cells=1681"), "stdout: {stdout}");
}

#[test]
fn solve_reports_unsat_with_outcome_json() {
    let dir = tempfile::tempdir().unwrap();
    let inst = PatchInstance {
        vertex_count: 1,
        boundary: vec![false],
        edges: vec![],
        alphabet: vec!["x".into()],
        forbidden: vec![ForbiddenPattern { symbols: vec!["x".into()], edges: vec![] }],
    };
    let input = dir.path().join("contradictory.json");
    std::fs::write(&input, serde_json::to_vec_pretty(&inst).unwrap()).unwrap();
    let outcome = dir.path().join("outcome.json");
    let (stdout, _, code) = run(&[
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--output",
        outcome.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "unsat is an answer, not an error");
    assert_eq!(stdout.trim(), "UNSAT");
    let value: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&outcome).unwrap()).unwrap();
    assert_eq!(value["status"], "unsat");
}

#[test]
fn solve_family_semi_decides_emptiness() {
    let dir = tempfile::tempdir().unwrap();
    let family = serde_json::json!({
        "substitution": SubstitutionSpec::from_parts(&ring_substitution(), None),
        "seed": "a",
        "alphabet": ["x"],
        "forbidden": [{
            "symbols": ["x", "x"],
            "edges": [{"from": 0, "to": 1, "tag": "next"}],
        }],
    });
    let input = dir.path().join("family.json");
    std::fs::write(&input, serde_json::to_vec_pretty(&family).unwrap()).unwrap();
    let (stdout, _, code) =
        run(&["solve", "--input", input.to_str().unwrap(), "--radius", "2"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("radius 0: SAT"), "stdout: {stdout}");
    assert!(stdout.contains("radius 1: SAT"), "stdout: {stdout}");
    assert!(
        stdout.contains("UNSAT at radius 2: the whole family is empty"),
        "stdout: {stdout}"
    );
}

#[test]
fn reduce_surface_rewrites_words() {
    let (stdout, _, code) = run(&["reduce-surface", "--word", "abABc"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines, vec!["dcD", "nontrivial"]);

    // the defining relator collapses to the identity
    let (stdout, _, code) = run(&["reduce-surface", "--word", "abABcdCD"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines, vec!["1", "trivial"]);
}

#[test]
fn reduce_surface_transports_pattern_sets() {
    let dir = tempfile::tempdir().unwrap();
    let patterns = serde_json::json!([
        {
            "support": [{"row": 0, "col": 2}, {"row": 0, "col": 3}],
            "symbols": ["p", "q"],
        },
        {
            "support": [{"row": 7, "col": 0}],
            "symbols": ["p"],
        },
    ]);
    let input = dir.path().join("patterns.json");
    std::fs::write(&input, serde_json::to_vec_pretty(&patterns).unwrap()).unwrap();
    let output = dir.path().join("transported.json");
    let (stdout, _, code) = run(&[
        "reduce-surface",
        "--input",
        input.to_str().unwrap(),
        "--radius",
        "2",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "transported: 1  skipped: 1");
    let value: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&output).unwrap()).unwrap();
    assert_eq!(value["skipped"], serde_json::json!([1]));
    assert_eq!(value["transported"][0]["moves"][0][2], serde_json::json!(["R"]));
}

#[test]
fn orbit_output_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = doubling(dir.path());
    let mut bytes = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let (stdout, _, code) = run(&[
            "orbit",
            "--input",
            spec.to_str().unwrap(),
            "--word",
            "0",
            "--depth",
            "3",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(stdout.contains("rows: 1 2 4 8"), "stdout: {stdout}");
        bytes.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(bytes[0], bytes[1], "repeated runs must write identical bytes");
}

#[test]
fn render_matches_the_golden_svg() {
    let dir = tempfile::tempdir().unwrap();
    let spec = doubling(dir.path());
    let out = dir.path().join("tiles.svg");
    let (stdout, _, code) = run(&[
        "render",
        "--input",
        spec.to_str().unwrap(),
        "--word",
        "0",
        "--depth",
        "2",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("tiles: 7"), "stdout: {stdout}");
    let got = std::fs::read(&out).unwrap();
    let want = include_bytes!("golden/doubling-depth2.svg");
    assert_eq!(got, want, "rendered SVG drifted from the golden file");
}

#[test]
fn missing_input_fails_and_names_the_path() {
    let (_, stderr, code) = run(&["eig", "--input", "/nonexistent/sub.json"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("/nonexistent/sub.json"), "stderr: {stderr}");
}

#[test]
fn unknown_flags_are_usage_errors() {
    let (_, _, code) = run(&["eig", "--frobnicate"]);
    assert_eq!(code, 2);
    let (_, _, code) = run(&["reduce-surface"]);
    assert_eq!(code, 2, "one of --word and --input is required");
}
