//! The verification suite: every acceptance criterion as a callable check,
//! shared by the CLI `verify` command and the integration tests.

pub mod fixtures;
mod graphs;
mod numeric;
pub mod oracle;

pub use graphs::random_solvable_system;

use std::time::Instant;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
    pub millis: u128,
}

impl CriterionOutcome {
    pub fn summary_line(&self) -> String {
        format!(
            "C{:02} {:<44} {} ({} ms)",
            self.id,
            self.name,
            if self.passed { "pass" } else { "FAIL" },
            self.millis
        )
    }
}

struct Check {
    name: &'static str,
    passed: bool,
    details: Vec<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            passed: true,
            details: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.details.push(format!("ok: {what}"));
        } else {
            self.passed = false;
            self.details.push(format!("FAILED: {what}"));
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.details.push(what.into());
    }

    fn finish(self, id: u8, started: Instant) -> CriterionOutcome {
        CriterionOutcome {
            id,
            name: self.name,
            passed: self.passed,
            details: self.details,
            millis: started.elapsed().as_millis(),
        }
    }
}

fn run(id: u8, name: &'static str, body: impl FnOnce(&mut Check)) -> CriterionOutcome {
    let started = Instant::now();
    let mut check = Check::new(name);
    body(&mut check);
    check.finish(id, started)
}

/// Controls sweep sizes; `quick` trims the statistical criteria so the whole
/// suite finishes in seconds during development.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub quick: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { quick: false }
    }
}

pub fn criterion(id: u8, opts: VerifyOptions) -> CriterionOutcome {
    match id {
        1 => graphs::c01_augmented_graph(),
        2 => graphs::c02_collapsed_graph(),
        3 => graphs::c03_separation_example(),
        4 => graphs::c04_separation_oracle(opts),
        5 => graphs::c05_split_and_subsample(),
        6 => graphs::c06_collapse_consistency(opts),
        7 => graphs::c07_discovery_fixture(),
        8 => graphs::c08_discovery_soundness(opts),
        9 => graphs::c09_solvability(),
        10 => numeric::c10_adaptedness(opts),
        11 => numeric::c11_moments(opts),
        12 => numeric::c12_markov_property(opts),
        13 => numeric::c13_local_independence(opts),
        other => panic!("no criterion {other}"),
    }
}

pub const CRITERIA: [u8; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13];

pub fn run_all(opts: VerifyOptions) -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|&id| criterion(id, opts)).collect()
}
