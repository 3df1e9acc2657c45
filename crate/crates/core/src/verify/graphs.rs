//! Graph-side verification criteria: reference-graph replication, separation
//! oracles, transformation consistency, and discovery checks.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::dmg::{Dependence, Dmg, NodeId, SeparationMode};
use crate::discovery::{fci, soundness_check, Mark};
use crate::expr::Expr;
use crate::independence::{enumerate_im, enumerate_im_over};
use crate::model::{parse_model, DriverKind, DriverSpec, InitDist, ProcessSpec, SdeSystem};
use crate::partition::TimeVal;
use crate::timeops::{collapse_graph, subsample_graph, time_split_graph, SplitMeta, SplitMode};
use crate::verify::{fixtures, oracle, run, CriterionOutcome, VerifyOptions};

fn demo_system() -> SdeSystem {
    parse_model(fixtures::CYCLIC4_MODEL)
        .expect("bundled model parses")
        .system
}

pub fn c01_augmented_graph() -> CriterionOutcome {
    run(1, "augmented graph of the bundled model", |c| {
        let sys = demo_system();
        let g = sys.graph_of_sdes();
        let reference = fixtures::cyclic4_augmented();
        c.require(g == reference, "edge set matches the reference exactly");
        let adapted: BTreeSet<(String, String)> = g
            .edges()
            .filter(|e| e.dependence == Dependence::Adapted)
            .map(|e| (g.node(e.src).name(), g.node(e.dst).name()))
            .collect();
        let expected: BTreeSet<(String, String)> = fixtures::cyclic4_adapted_edges()
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        c.require(adapted == expected, "adapted edges are exactly W->X1, W->X3, N->X2, X2->X4");
    })
}

pub fn c02_collapsed_graph() -> CriterionOutcome {
    run(2, "collapsed graph with induced confounding", |c| {
        let sys = demo_system();
        let dmg = sys.graph_of_sdes().to_dmg();
        c.require(dmg == fixtures::cyclic4_dmg(), "collapsed graph matches the reference");
        c.require(
            dmg.has_bidirected("X1", "X3"),
            "shared Brownian driver leaves an adapted bidirected edge",
        );
    })
}

pub fn c03_separation_example() -> CriterionOutcome {
    run(3, "d-separated but sigma-connected initials", |c| {
        let g = fixtures::cyclic4_augmented();
        let d = g
            .separated_by_name(&["X1^0"], &["X2^0"], &["X1", "X2"], SeparationMode::D)
            .unwrap();
        let s = g
            .separated_by_name(&["X1^0"], &["X2^0"], &["X1", "X2"], SeparationMode::Sigma)
            .unwrap();
        c.require(d, "initials d-separated given {X1, X2}");
        c.require(!s, "initials sigma-connected given {X1, X2}");
    })
}

/// All DMGs over `n` nodes whose edge slots are chosen from `masks` bits:
/// the first n*(n-1) slots are ordered directed pairs, the rest unordered
/// bidirected pairs.
fn graph_from_mask(n: usize, mask: u32, slots: &[(usize, usize, bool)]) -> Dmg {
    let mut g = Dmg::new();
    for i in 0..n {
        g.add_node(NodeId::endogenous(format!("n{i}"))).unwrap();
    }
    for (bit, &(a, b, bidir)) in slots.iter().enumerate() {
        if mask & (1 << bit) != 0 {
            if bidir {
                g.add_bidirected(a, b, Dependence::Predictable).unwrap();
            } else {
                g.add_directed(a, b, Dependence::Predictable).unwrap();
            }
        }
    }
    g
}

fn separation_queries(n: usize) -> Vec<(usize, usize, Vec<usize>)> {
    let mut queries = Vec::new();
    for (a, b) in [(0usize, 1usize), (0, 2), (1, 3)] {
        if a >= n || b >= n {
            continue;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| v != a && v != b).collect();
        let mut csets: Vec<Vec<usize>> = vec![vec![]];
        for &r in &rest {
            csets.push(vec![r]);
        }
        if rest.len() >= 2 {
            csets.push(rest.clone());
        }
        for cs in csets {
            queries.push((a, b, cs));
        }
    }
    queries
}

fn agree_with_oracle(g: &Dmg, queries: &[(usize, usize, Vec<usize>)]) -> bool {
    for (a, b, cs) in queries {
        let aset: BTreeSet<usize> = [*a].into_iter().collect();
        let bset: BTreeSet<usize> = [*b].into_iter().collect();
        let cset: BTreeSet<usize> = cs.iter().copied().collect();
        for mode in [SeparationMode::Sigma, SeparationMode::D] {
            let fast = !g.connected(&aset, &bset, &cset, mode);
            let slow = oracle::separated_by_walk_enumeration(g, &aset, &bset, &cset, mode);
            if fast != slow {
                return false;
            }
        }
        // Sigma-separation implies d-separation.
        let sig = !g.connected(&aset, &bset, &cset, SeparationMode::Sigma);
        let d = !g.connected(&aset, &bset, &cset, SeparationMode::D);
        if sig && !d {
            return false;
        }
    }
    true
}

pub fn c04_separation_oracle(opts: VerifyOptions) -> CriterionOutcome {
    run(4, "separation agrees with walk enumeration", |c| {
        // Exhaustive family: 4 nodes, up to 6 edges drawn from 12 directed
        // and 6 bidirected slots.
        let n = 4usize;
        let mut slots: Vec<(usize, usize, bool)> = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    slots.push((a, b, false));
                }
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                slots.push((a, b, true));
            }
        }
        let queries = separation_queries(n);
        let mut graphs = 0usize;
        let mut disagreements = 0usize;
        let max_mask: u32 = 1 << slots.len();
        let stride = if opts.quick { 17 } else { 1 };
        let mut mask = 0u32;
        while mask < max_mask {
            if mask.count_ones() <= 6 {
                let g = graph_from_mask(n, mask, &slots);
                graphs += 1;
                if !agree_with_oracle(&g, &queries) {
                    disagreements += 1;
                }
            }
            mask += stride;
        }
        c.note(format!("exhaustive family: {graphs} graphs"));
        c.require(disagreements == 0, "exhaustive family agreement");

        // Random 6-node graphs.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 6usize;
        let rounds = if opts.quick { 100 } else { 1000 };
        let queries = separation_queries(n);
        let mut bad = 0usize;
        for _ in 0..rounds {
            let mut g = Dmg::new();
            for i in 0..n {
                g.add_node(NodeId::endogenous(format!("n{i}"))).unwrap();
            }
            for _ in 0..rng.random_range(0..=10) {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                if a != b {
                    g.add_directed(a, b, Dependence::Predictable).unwrap();
                }
            }
            for _ in 0..rng.random_range(0..=4) {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                if a != b {
                    g.add_bidirected(a, b, Dependence::Predictable).unwrap();
                }
            }
            if !agree_with_oracle(&g, &queries) {
                bad += 1;
            }
        }
        c.note(format!("random sweep: {rounds} graphs"));
        c.require(bad == 0, "random sweep agreement");
    })
}

pub fn c05_split_and_subsample() -> CriterionOutcome {
    run(5, "time-split and subsampled reference graphs", |c| {
        let sys = demo_system();
        let aug = sys.graph_of_sdes();
        let marg = aug
            .latent_project_by_name(&["X3^0", "X3", "X4^0"])
            .unwrap();
        let meta = SplitMeta::from_system(&sys);
        let tau = [TimeVal::new(0.0), TimeVal::new(0.4), TimeVal::new(0.8)];
        let sg =
            time_split_graph(&marg, &meta, &tau, sys.horizon, SplitMode::Figure).unwrap();

        let got = sg.graph.canonical_edges();
        let want = fixtures::canonical(&fixtures::split_mid_reference_edges());
        if got != want {
            for e in got.difference(&want) {
                c.note(format!("unexpected split edge: {e:?}"));
            }
            for e in want.difference(&got) {
                c.note(format!("missing split edge: {e:?}"));
            }
        }
        c.require(got == want, "time-split edge set matches the reference exactly");

        let sub = subsample_graph(&sg).unwrap();
        let nodes: BTreeSet<String> = sub.nodes().map(|(_, n)| n.name()).collect();
        let want_nodes: BTreeSet<String> = fixtures::subsample_reference_nodes()
            .into_iter()
            .map(|s| s.to_string())
            .collect();
        c.require(nodes == want_nodes, "subsample keeps exactly the point nodes");

        let got = sub.canonical_edges();
        let drawn = fixtures::canonical(&fixtures::subsample_reference_edges());
        let missing: Vec<_> = drawn.difference(&got).collect();
        c.require(
            missing.is_empty(),
            format!(
                "all {} reference subsample edges reproduced (missing {})",
                drawn.len(),
                missing.len()
            ),
        );
        let extras: BTreeSet<_> = got.difference(&drawn).cloned().collect();
        let expected_extras = fixtures::canonical(&fixtures::subsample_projection_extras());
        c.note(format!(
            "{} additional projection-induced edges (driver influence beyond direct children and composed couplings); these follow from the retained dependencies and are pinned",
            extras.len()
        ));
        c.require(
            extras == expected_extras,
            "projection-induced extras match the analysed closure",
        );
    })
}

/// Random uniquely-solvable systems for consistency sweeps: a handful of
/// processes with arbitrary lagged coupling, Brownian or lower-indexed
/// endogenous integrators, and unit integrands.
pub fn random_solvable_system(rng: &mut ChaCha8Rng) -> SdeSystem {
    loop {
        let n_proc = rng.random_range(2..=5);
        let n_drv = rng.random_range(1..=2);
        let drivers: Vec<DriverSpec> = (0..n_drv)
            .map(|i| DriverSpec {
                name: format!("D{i}"),
                kind: DriverKind::Brownian,
            })
            .collect();
        let names: Vec<String> = (0..n_proc).map(|i| format!("P{i}")).collect();
        let mut processes = Vec::new();
        for (i, name) in names.iter().enumerate() {
            let mut alpha = vec![name.clone()];
            for _ in 0..rng.random_range(0..=2) {
                let j = rng.random_range(0..n_proc);
                if j != i && !alpha.contains(&names[j]) {
                    alpha.push(names[j].clone());
                }
            }
            let mut beta = Vec::new();
            if rng.random_bool(0.9) {
                beta.push(format!("D{}", rng.random_range(0..n_drv)));
            }
            if rng.random_bool(0.3) {
                let j = rng.random_range(0..n_proc);
                if j != i && !beta.contains(&names[j]) {
                    beta.push(names[j].clone());
                }
            }
            let integrands = beta.iter().map(|_| Expr::Const(1.0)).collect();
            processes.push(ProcessSpec {
                name: name.clone(),
                init: if rng.random_bool(0.8) {
                    InitDist::Normal { mean: 0.0, var: 1.0 }
                } else {
                    InitDist::Constant(0.0)
                },
                alpha,
                beta,
                integrands,
                markov: rng.random_bool(0.5),
            });
        }
        let sys = SdeSystem {
            processes,
            drivers,
            labels: Vec::new(),
            horizon: 1.0,
        };
        if sys.check_unique_solvability().solvable {
            return sys;
        }
    }
}

pub fn c06_collapse_consistency(opts: VerifyOptions) -> CriterionOutcome {
    run(6, "collapsing inverts time-splitting", |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rounds = if opts.quick { 40 } else { 200 };
        let mut identity_failures = 0usize;
        let mut inequality_failures = 0usize;
        for _ in 0..rounds {
            let sys = random_solvable_system(&mut rng);
            let aug = sys.graph_of_sdes();
            let meta = SplitMeta::from_system(&sys);
            let k = rng.random_range(0..=4usize);
            let mut times: Vec<f64> = Vec::new();
            while times.len() < k {
                let t = (rng.random_range(0..=10) as f64) / 10.0;
                if !times.contains(&t) {
                    times.push(t);
                }
            }
            let tau: Vec<TimeVal> = times.iter().map(|&t| TimeVal::new(t)).collect();
            let sg = time_split_graph(&aug, &meta, &tau, sys.horizon, SplitMode::Strict)
                .unwrap();
            if collapse_graph(&sg).unwrap() != aug {
                identity_failures += 1;
            }
            if !tau.is_empty() {
                // Subsampling then collapsing loses the interval pieces:
                // the recovered evaluation index differs from the original.
                let sub = subsample_graph(&sg).unwrap();
                let sub_evals: BTreeSet<String> =
                    sub.nodes().map(|(_, n)| n.name()).collect();
                let base_evals: BTreeSet<String> =
                    aug.nodes().map(|(_, n)| n.name()).collect();
                if sub_evals == base_evals {
                    inequality_failures += 1;
                }
            }
        }
        c.note(format!("{rounds} random solvable systems"));
        c.require(identity_failures == 0, "collapse(split(g, tau)) == g");
        c.require(
            inequality_failures == 0,
            "subsampled node set differs whenever tau is a proper refinement",
        );
    })
}

pub fn c07_discovery_fixture() -> CriterionOutcome {
    run(7, "discovery on the split-at-zero model", |c| {
        let sys = demo_system();
        let aug = sys.graph_of_sdes();
        let meta = SplitMeta::from_system(&sys);
        let sg = time_split_graph(
            &aug,
            &meta,
            &[TimeVal::new(0.0)],
            sys.horizon,
            SplitMode::Figure,
        )
        .unwrap();
        let dmg = sg.graph.to_dmg();
        let n = dmg.node_count();
        let im = enumerate_im(&dmg, n - 2).unwrap();
        let pag = fci(&im).unwrap();

        let skeleton = pag.adjacencies();
        let expected: BTreeSet<(String, String)> = fixtures::ev0_pag_skeleton()
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        if skeleton != expected {
            for e in skeleton.difference(&expected) {
                c.note(format!("unexpected adjacency: {e:?}"));
            }
            for e in expected.difference(&skeleton) {
                c.note(format!("missing adjacency: {e:?}"));
            }
        }
        c.require(skeleton == expected, "adjacency skeleton matches exactly");

        let x2 = pag.index_of("X2^(0,1]").unwrap();
        let x4 = pag.index_of("X4^(0,1]").unwrap();
        c.require(
            pag.mark_at(x4, x2) == Some(Mark::Tail) && pag.mark_at(x2, x4) == Some(Mark::Arrow),
            "X2 -> X4 comes out fully directed",
        );

        // Endpoint marks on the remaining edges: expected but reported.
        let mut mismatches = 0usize;
        for (a, b, glyph) in fixtures::ev0_pag_glyphs() {
            let (ia, ib) = (pag.index_of(a), pag.index_of(b));
            let got = match (ia, ib) {
                (Some(ia), Some(ib)) => pag.edge_glyph(ia, ib),
                _ => None,
            };
            if got.as_deref() != Some(glyph) {
                mismatches += 1;
                c.note(format!(
                    "endpoint marks {a} ?-? {b}: expected {glyph}, got {got:?} (reported)"
                ));
            }
        }
        c.note(format!(
            "endpoint marks: {}/{} as expected (reported, not asserted beyond the directed edge)",
            fixtures::ev0_pag_glyphs().len() - mismatches,
            fixtures::ev0_pag_glyphs().len()
        ));
    })
}

pub fn c08_discovery_soundness(opts: VerifyOptions) -> CriterionOutcome {
    run(8, "discovery soundness sweep", |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rounds = if opts.quick { 40 } else { 200 };
        let mut failures = 0usize;
        for round in 0..rounds {
            let n = rng.random_range(3..=6);
            let mut g = Dmg::new();
            for i in 0..n {
                g.add_node(NodeId::endogenous(format!("n{i}"))).unwrap();
            }
            for _ in 0..rng.random_range(0..=8) {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                if a != b {
                    g.add_directed(a, b, Dependence::Predictable).unwrap();
                }
            }
            for _ in 0..rng.random_range(0..=3) {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                if a != b {
                    g.add_bidirected(a, b, Dependence::Predictable).unwrap();
                }
            }
            let im = enumerate_im(&g, n - 2).unwrap();
            match fci(&im).and_then(|pag| soundness_check(&g, &pag)) {
                Ok(true) => {}
                Ok(false) => {
                    failures += 1;
                    c.note(format!("round {round}: unsound output"));
                }
                Err(e) => {
                    failures += 1;
                    c.note(format!("round {round}: {e}"));
                }
            }
        }
        c.note(format!("{rounds} random graphs up to 6 nodes"));
        c.require(failures == 0, "every output sound against its generator");
    })
}

pub fn c09_solvability() -> CriterionOutcome {
    run(9, "unique solvability and its witness", |c| {
        let sys = demo_system();
        let report = sys.check_unique_solvability();
        c.require(report.solvable, "bundled model is uniquely solvable");
        c.require(
            !report.scc_order.is_empty(),
            "component order emitted for the constructive argument",
        );

        let mutated = parse_model(fixtures::CYCLIC4_BETA_MUTATION).unwrap().system;
        let report = mutated.check_unique_solvability();
        c.require(!report.solvable, "integrator inside its own cycle is rejected");
        c.require(
            report.witness == Some(("X3".to_string(), vec!["X2".to_string()])),
            "witness names X3 with offending integrator X2",
        );
    })
}

/// Shared with the numeric criteria: the enumeration universe for the
/// subsampled linear model (initial values plus the two sample layers).
pub(crate) fn linear4_subsampled_universe(dmg_nodes: &[String]) -> Vec<String> {
    let mut v: Vec<String> = dmg_nodes
        .iter()
        .filter(|n| n.ends_with("^0") || n.contains("^{"))
        .cloned()
        .collect();
    v.sort();
    v
}

pub(crate) fn sigma_separated_triples(
    g: &Dmg,
    universe: &[String],
    max_c: usize,
) -> Vec<(String, String, Vec<String>)> {
    let im = enumerate_im_over(g, max_c, Some(universe), universe.len()).unwrap();
    im.separations()
        .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_vec()))
        .collect()
}
