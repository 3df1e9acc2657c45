//! Property tests for the graph layer: separation invariants, projection
//! composition, transformation consistency, and discovery cross-checks.

use std::collections::BTreeSet;

use proptest::prelude::*;

use dscm_core::dmg::{Dependence, Dmg, EdgeKind, NodeId, SeparationMode};
use dscm_core::discovery::fci;
use dscm_core::independence::{docalc_check, enumerate_im};

#[derive(Debug, Clone)]
struct RawGraph {
    n: usize,
    directed: Vec<(usize, usize)>,
    bidirected: Vec<(usize, usize)>,
}

impl RawGraph {
    fn build(&self) -> Dmg {
        let mut g = Dmg::new();
        for i in 0..self.n {
            g.add_node(NodeId::endogenous(format!("n{i}"))).unwrap();
        }
        for &(a, b) in &self.directed {
            g.add_directed(a, b, Dependence::Predictable).unwrap();
        }
        for &(a, b) in &self.bidirected {
            g.add_bidirected(a, b, Dependence::Adapted).unwrap();
        }
        g
    }
}

fn arb_graph(max_n: usize, max_e: usize) -> impl Strategy<Value = RawGraph> {
    (2..=max_n).prop_flat_map(move |n| {
        let pair = (0..n, 0..n).prop_filter("no self loops", |(a, b)| a != b);
        (
            proptest::collection::vec(pair.clone(), 0..=max_e),
            proptest::collection::vec(pair, 0..=max_e / 2),
        )
            .prop_map(move |(directed, bidirected)| RawGraph {
                n,
                directed,
                bidirected,
            })
    })
}

fn arb_query(n: usize) -> impl Strategy<Value = (usize, usize, Vec<usize>)> {
    (0..n, 0..n, proptest::collection::vec(0..n, 0..=3))
        .prop_filter("distinct endpoints", |(a, b, _)| a != b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sigma_separation_implies_d_separation(
        raw in arb_graph(6, 10),
        q in (0usize..6, 0usize..6, proptest::collection::vec(0usize..6, 0..=3)),
    ) {
        let g = raw.build();
        let (a, b, c) = q;
        prop_assume!(a < raw.n && b < raw.n && a != b);
        let aset: BTreeSet<usize> = [a].into_iter().collect();
        let bset: BTreeSet<usize> = [b].into_iter().collect();
        let cset: BTreeSet<usize> = c.into_iter().filter(|&v| v < raw.n).collect();
        if g.sigma_separated(&aset, &bset, &cset) {
            prop_assert!(g.d_separated(&aset, &bset, &cset));
        }
    }

    #[test]
    fn separation_is_symmetric(raw in arb_graph(6, 10), q in arb_query(6)) {
        let g = raw.build();
        let (a, b, c) = q;
        prop_assume!(a < raw.n && b < raw.n);
        let aset: BTreeSet<usize> = [a].into_iter().collect();
        let bset: BTreeSet<usize> = [b].into_iter().collect();
        let cset: BTreeSet<usize> = c.into_iter().filter(|&v| v < raw.n).collect();
        for mode in [SeparationMode::Sigma, SeparationMode::D] {
            prop_assert_eq!(
                !g.connected(&aset, &bset, &cset, mode),
                !g.connected(&bset, &aset, &cset, mode)
            );
        }
    }

    #[test]
    fn separation_is_monotone_under_edge_removal(
        raw in arb_graph(6, 10),
        q in arb_query(6),
        which in any::<prop::sample::Index>(),
    ) {
        let g = raw.build();
        let (a, b, c) = q;
        prop_assume!(a < raw.n && b < raw.n);
        let total = raw.directed.len() + raw.bidirected.len();
        prop_assume!(total > 0);
        let drop_idx = which.index(total);
        let mut thinner = raw.clone();
        if drop_idx < thinner.directed.len() {
            thinner.directed.remove(drop_idx);
        } else {
            let k = drop_idx - thinner.directed.len();
            thinner.bidirected.remove(k);
        }
        let h = thinner.build();
        let aset: BTreeSet<usize> = [a].into_iter().collect();
        let bset: BTreeSet<usize> = [b].into_iter().collect();
        let cset: BTreeSet<usize> = c.into_iter().filter(|&v| v < raw.n).collect();
        for mode in [SeparationMode::Sigma, SeparationMode::D] {
            if !g.connected(&aset, &bset, &cset, mode) {
                prop_assert!(
                    !h.connected(&aset, &bset, &cset, mode),
                    "removing an edge destroyed a separation"
                );
            }
        }
    }

    #[test]
    fn latent_projection_composes(raw in arb_graph(6, 8), split in any::<u8>()) {
        let g = raw.build();
        // Partition nodes 0..n into kept / drop1 / drop2 from the bits.
        let mut l1: BTreeSet<usize> = BTreeSet::new();
        let mut l2: BTreeSet<usize> = BTreeSet::new();
        for v in 0..raw.n {
            match (split >> (v % 8)) & 3 {
                1 => {
                    l1.insert(v);
                }
                2 => {
                    l2.insert(v);
                }
                _ => {}
            }
        }
        prop_assume!(l1.len() + l2.len() < raw.n);
        let joint: BTreeSet<usize> = l1.union(&l2).copied().collect();
        let direct = g.latent_project(&joint).unwrap();
        let first = g.latent_project(&l1).unwrap();
        // Re-resolve indices of the second drop set in the projected graph.
        let l2_names: Vec<String> = l2.iter().map(|&v| format!("n{v}")).collect();
        let l2_refs: Vec<&str> = l2_names.iter().map(|s| s.as_str()).collect();
        let staged = first.latent_project_by_name(&l2_refs).unwrap();
        prop_assert_eq!(staged, direct);
    }

    #[test]
    fn enumeration_is_monotone_under_edge_removal(
        raw in arb_graph(5, 7),
        which in any::<prop::sample::Index>(),
    ) {
        let total = raw.directed.len() + raw.bidirected.len();
        prop_assume!(total > 0);
        let g = raw.build();
        let drop_idx = which.index(total);
        let mut thinner = raw.clone();
        if drop_idx < thinner.directed.len() {
            thinner.directed.remove(drop_idx);
        } else {
            let k = drop_idx - thinner.directed.len();
            thinner.bidirected.remove(k);
        }
        let h = thinner.build();
        let im_g = enumerate_im(&g, raw.n.saturating_sub(2)).unwrap();
        let im_h = enumerate_im(&h, raw.n.saturating_sub(2)).unwrap();
        for (a, b, c) in im_g.separations() {
            prop_assert_eq!(
                im_h.lookup(a, b, c),
                Some(true),
                "edge removal lost separation {} _||_ {} | {:?}",
                a,
                b,
                c
            );
        }
    }

    #[test]
    fn extra_separations_never_add_adjacencies(
        raw in arb_graph(5, 7),
    ) {
        let g = raw.build();
        let im = enumerate_im(&g, raw.n.saturating_sub(2)).unwrap();
        let pag = fci(&im).unwrap();
        // Forcing one more pair separated can only shrink the skeleton.
        let mut richer = im.clone();
        let names: Vec<String> = (0..raw.n).map(|i| format!("n{i}")).collect();
        richer.insert(&names[0], &names[1], &[], true);
        let pag2 = fci(&richer).unwrap();
        prop_assert!(pag2.adjacencies().is_subset(&pag.adjacencies()));
    }
}

/// PC-style skeleton for acyclic latent-free models: adjacency iff no subset
/// of the remaining variables d-separates.
fn pc_skeleton(g: &Dmg) -> BTreeSet<(String, String)> {
    let n = g.node_count();
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            let rest: Vec<usize> = (0..n).filter(|&v| v != a && v != b).collect();
            let mut separated = false;
            for mask in 0u32..(1 << rest.len()) {
                let c: BTreeSet<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &v)| v)
                    .collect();
                let aset = [a].into_iter().collect();
                let bset = [b].into_iter().collect();
                if g.d_separated(&aset, &bset, &c) {
                    separated = true;
                    break;
                }
            }
            if !separated {
                out.insert((g.node(a).name(), g.node(b).name()));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fci_skeleton_matches_pc_on_dags(edges in proptest::collection::vec((0usize..5, 0usize..5), 0..8)) {
        // Orient pairs upward to guarantee acyclicity.
        let mut g = Dmg::new();
        for i in 0..5 {
            g.add_node(NodeId::endogenous(format!("n{i}"))).unwrap();
        }
        for (a, b) in edges {
            if a < b {
                g.add_directed(a, b, Dependence::Predictable).unwrap();
            }
        }
        let im = enumerate_im(&g, 3).unwrap();
        let pag = fci(&im).unwrap();
        prop_assert_eq!(pag.adjacencies(), pc_skeleton(&g));
    }

    #[test]
    fn docalc_rule2_matches_backdoor_on_dags(
        edges in proptest::collection::vec((0usize..5, 0usize..5), 0..8),
        x in 0usize..5,
        y in 0usize..5,
    ) {
        prop_assume!(x != y);
        let mut g = Dmg::new();
        for i in 0..5 {
            g.add_node(NodeId::endogenous(format!("n{i}"))).unwrap();
        }
        for (a, b) in edges {
            if a < b {
                g.add_directed(a, b, Dependence::Predictable).unwrap();
            }
        }
        let xn = format!("n{x}");
        let yn = format!("n{y}");
        let holds = docalc_check(&g, 2, &[&xn], &[&yn], &[], &[]).unwrap();

        // Classic test: Y independent of X in the graph with X's outgoing
        // edges removed.
        let mut cut = Dmg::new();
        for i in 0..5 {
            cut.add_node(NodeId::endogenous(format!("n{i}"))).unwrap();
        }
        for e in g.edges() {
            if e.kind == EdgeKind::Directed && e.src != x {
                cut.add_directed(e.src, e.dst, e.dependence).unwrap();
            }
        }
        let backdoor = cut
            .separated_by_name(&[&yn], &[&xn], &[], SeparationMode::D)
            .unwrap();
        prop_assert_eq!(holds, backdoor);
    }
}

#[test]
fn discovery_equivalence_biconditional_on_random_pairs() {
    use dscm_core::discovery::completeness_check;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    // Two graphs over the same universe map to the same output exactly when
    // their independence models agree.
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let mut random_graph = |rng: &mut ChaCha8Rng, n: usize| {
        let mut g = Dmg::new();
        for i in 0..n {
            g.add_node(NodeId::endogenous(format!("n{i}"))).unwrap();
        }
        for _ in 0..rng.random_range(0..=7) {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                g.add_directed(a, b, Dependence::Predictable).unwrap();
            }
        }
        for _ in 0..rng.random_range(0..=2) {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                g.add_bidirected(a, b, Dependence::Predictable).unwrap();
            }
        }
        g
    };
    for _ in 0..300 {
        let n = rng.random_range(3..=5);
        let g1 = random_graph(&mut rng, n);
        let g2 = random_graph(&mut rng, n);
        assert!(completeness_check(&g1, &g2).unwrap());
    }
}

#[test]
fn guarantee_flag_tracks_dmg_structure() {
    use dscm_core::independence::local_independence_graph;
    use dscm_core::model::parse_model;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    // Random small systems: the guarantee must be false exactly when the
    // collapsed graph shows an adapted bidirected edge or an adapted
    // endogenous-to-endogenous edge.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let n = rng.random_range(2..=3usize);
        let mut text = String::from("system {\n  exogenous W0: brownian;\n  exogenous W1: brownian;\n");
        for i in 0..n {
            let driver = format!("W{}", rng.random_range(0..2));
            let endo_beta = i > 0 && rng.random_bool(0.3);
            let beta = if endo_beta {
                format!("P{}", rng.random_range(0..i))
            } else {
                driver
            };
            text.push_str(&format!(
                "  process P{i} {{ init = normal(0,1); alpha = {{P{i}}}; beta = {{{beta}}}; g = [1]; }}\n"
            ));
        }
        text.push_str("  horizon 1;\n}\n");
        let sys = parse_model(&text).unwrap().system;
        let aug = sys.graph_of_sdes();
        let lig = local_independence_graph(&aug);
        let dmg = aug.to_dmg();
        let structural_violation = dmg.edges().any(|e| {
            e.dependence == Dependence::Adapted
                && (e.kind == EdgeKind::Bidirected || e.kind == EdgeKind::Directed)
        });
        assert_eq!(
            lig.guarantee, !structural_violation,
            "guarantee flag out of sync for:\n{text}"
        );
    }
}
