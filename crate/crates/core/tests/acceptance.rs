//! Full verification suite, one test per criterion. Each test prints its
//! pass/fail line and the detail log.

use dscm_core::verify::{criterion, CriterionOutcome, VerifyOptions};

fn check(id: u8) {
    let outcome: CriterionOutcome = criterion(id, VerifyOptions::default());
    println!("{}", outcome.summary_line());
    for line in &outcome.details {
        println!("    {line}");
    }
    assert!(outcome.passed, "criterion {id} failed: {:?}", outcome.details);
}

#[test]
fn criterion_01_augmented_graph() {
    check(1);
}

#[test]
fn criterion_02_collapsed_graph() {
    check(2);
}

#[test]
fn criterion_03_separation_example() {
    check(3);
}

#[test]
fn criterion_04_separation_oracle() {
    check(4);
}

#[test]
fn criterion_05_split_and_subsample() {
    check(5);
}

#[test]
fn criterion_06_collapse_consistency() {
    check(6);
}

#[test]
fn criterion_07_discovery_fixture() {
    check(7);
}

#[test]
fn criterion_08_discovery_soundness() {
    check(8);
}

#[test]
fn criterion_09_solvability() {
    check(9);
}

#[test]
fn criterion_10_adaptedness() {
    check(10);
}

#[test]
fn criterion_11_moments() {
    check(11);
}

#[test]
fn criterion_12_markov_property() {
    check(12);
}

#[test]
fn criterion_13_local_independence() {
    check(13);
}
