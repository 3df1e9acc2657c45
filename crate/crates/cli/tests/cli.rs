//! End-to-end checks of the command-line interface.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dscm"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn graph_emits_dot_with_adapted_edges() {
    let out = bin()
        .args(["graph", fixture("cyclic4.dscm").to_str().unwrap(), "--format", "dot"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("digraph {"));
    assert!(text.contains("\"W\" -> \"X1\" [color=red]"));
    assert!(text.contains("\"X1\" -> \"X2\";"));
}

#[test]
fn sep_reports_separation_verdicts() {
    let model = fixture("cyclic4.dscm");
    let out = bin()
        .args([
            "sep",
            model.to_str().unwrap(),
            "--a",
            "X1^0",
            "--b",
            "X2^0",
            "--c",
            "X1,X2",
            "--mode",
            "d",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "separated: true");

    let out = bin()
        .args([
            "sep",
            model.to_str().unwrap(),
            "--a",
            "X1^0",
            "--b",
            "X2^0",
            "--c",
            "X1,X2",
            "--json",
        ])
        .output()
        .unwrap();
    assert!(stdout(&out).contains("\"separated\":false"));
}

#[test]
fn discovery_pipeline_through_files() {
    let dir = std::env::temp_dir().join("dscm-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let edges = dir.join("ev0.edges");
    let status = bin()
        .args([
            "split",
            fixture("cyclic4.dscm").to_str().unwrap(),
            "--tau",
            "0",
            "--mode",
            "figure",
            "--to-dmg",
            "--format",
            "edges",
            "-o",
            edges.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());

    let out = bin()
        .args(["fci", "--from-graph", edges.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("X2^(0,1] --> X4^(0,1]"));
    assert!(text.contains("X1^(0,1] o-o X2^(0,1]"));

    // im -> fci round trip agrees.
    let im_file = dir.join("model.im");
    assert!(bin()
        .args([
            "im",
            "--edges",
            edges.to_str().unwrap(),
            "-o",
            im_file.to_str().unwrap(),
        ])
        .status()
        .unwrap()
        .success());
    let out2 = bin()
        .args(["fci", "--im", im_file.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(text, stdout(&out2));
}

#[test]
fn simulate_emits_csv() {
    let out = bin()
        .args([
            "simulate",
            fixture("ou.dscm").to_str().unwrap(),
            "--dt",
            "0.1",
            "--paths",
            "2",
            "--seed",
            "7",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("time,process,path,value\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 11);
}

#[test]
fn validate_rejects_broken_models_with_domain_exit_code() {
    let out = bin()
        .args(["validate", fixture("cyclic4_beta_mutation.dscm").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("NOT uniquely solvable"));

    let out = bin()
        .args(["validate", fixture("cyclic4.dscm").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_with_code_two() {
    let out = bin().args(["sep"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn intervene_round_trips_through_the_parser() {
    let out = bin()
        .args([
            "intervene",
            fixture("cyclic4.dscm").to_str().unwrap(),
            "--do",
            "X2=1.5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("init = constant(1.5)"));
    assert!(text.contains("alpha = {};"));
    // The printed model parses again.
    assert!(dscm_core::parse_model(&text).is_ok());
}

#[test]
fn docalc_rule_check() {
    let out = bin()
        .args([
            "docalc",
            fixture("cyclic4.dscm").to_str().unwrap(),
            "--to-dmg",
            "--rule",
            "3",
            "--x",
            "X4",
            "--y",
            "X1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "rule 3 precondition holds: true");
}
