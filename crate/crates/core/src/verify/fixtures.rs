//! Bundled models and the frozen reference graphs the verification suite
//! compares against.

use crate::dmg::{Dependence, Dmg, EdgeKind, NodeId};

pub const CYCLIC4_MODEL: &str = include_str!("../../fixtures/cyclic4.dscm");
pub const CYCLIC4_BETA_MUTATION: &str =
    include_str!("../../fixtures/cyclic4_beta_mutation.dscm");
pub const LINEAR4_MODEL: &str = include_str!("../../fixtures/linear4.dscm");
pub const OU_MODEL: &str = include_str!("../../fixtures/ou.dscm");
pub const POISSON_COUNTER_MODEL: &str = include_str!("../../fixtures/poisson_counter.dscm");
pub const CHAIN3_MODEL: &str = include_str!("../../fixtures/chain3.dscm");

use Dependence::{Adapted as A, Predictable as P};

/// Reference dependency graph of the bundled cyclic4 model: the endogenous
/// three-cycle with its follower, the shared Brownian driver, the Poisson
/// driver, and one initial-value node per process.
pub fn cyclic4_augmented() -> Dmg {
    let mut g = Dmg::new();
    let x1 = g.add_node(NodeId::endogenous("X1")).unwrap();
    let x2 = g.add_node(NodeId::endogenous("X2")).unwrap();
    let x3 = g.add_node(NodeId::endogenous("X3")).unwrap();
    let x4 = g.add_node(NodeId::endogenous("X4")).unwrap();
    let w = g.add_node(NodeId::exogenous("W")).unwrap();
    let n = g.add_node(NodeId::exogenous("N")).unwrap();
    let inits: Vec<_> = (1..=4)
        .map(|i| g.add_node(NodeId::exogenous(format!("X{i}^0"))).unwrap())
        .collect();
    g.add_directed(x3, x1, P).unwrap();
    g.add_directed(x1, x2, P).unwrap();
    g.add_directed(x2, x3, P).unwrap();
    g.add_directed(x2, x4, A).unwrap();
    g.add_directed(w, x1, A).unwrap();
    g.add_directed(w, x3, A).unwrap();
    g.add_directed(n, x2, A).unwrap();
    for (i, &init) in inits.iter().enumerate() {
        g.add_directed(init, [x1, x2, x3, x4][i], P).unwrap();
    }
    g
}

/// The adapted edges the augmented reference graph must carry.
pub fn cyclic4_adapted_edges() -> Vec<(&'static str, &'static str)> {
    vec![("W", "X1"), ("W", "X3"), ("N", "X2"), ("X2", "X4")]
}

/// Reference collapsed graph: exogenous variables projected out, the shared
/// Brownian driver leaving an adapted bidirected edge behind.
pub fn cyclic4_dmg() -> Dmg {
    let mut g = Dmg::new();
    let x1 = g.add_node(NodeId::endogenous("X1")).unwrap();
    let x2 = g.add_node(NodeId::endogenous("X2")).unwrap();
    let x3 = g.add_node(NodeId::endogenous("X3")).unwrap();
    let x4 = g.add_node(NodeId::endogenous("X4")).unwrap();
    g.add_directed(x1, x2, P).unwrap();
    g.add_directed(x2, x3, P).unwrap();
    g.add_directed(x3, x1, P).unwrap();
    g.add_directed(x2, x4, A).unwrap();
    g.add_bidirected(x1, x3, A).unwrap();
    g
}

pub type EdgeRef = (&'static str, &'static str, Dependence);

/// Frozen edge set of the time-split graph (figure mode) of the cyclic4
/// model marginalised over {X3^0, X3, X4^0}, split at tau = (0, 0.4, 0.8).
pub fn split_mid_reference_edges() -> Vec<EdgeRef> {
    vec![
        // Continuations (initial values are the {0} pieces).
        ("X1^0", "X1^(0,0.4)", P),
        ("X1^(0,0.4)", "X1^{0.4}", P),
        ("X1^{0.4}", "X1^(0.4,0.8)", P),
        ("X1^(0.4,0.8)", "X1^{0.8}", P),
        ("X1^{0.8}", "X1^(0.8,1]", P),
        ("X2^0", "X2^(0,0.4)", P),
        ("X2^(0,0.4)", "X2^{0.4}", P),
        ("X2^{0.4}", "X2^(0.4,0.8)", P),
        ("X2^(0.4,0.8)", "X2^{0.8}", P),
        ("X2^{0.8}", "X2^(0.8,1]", P),
        ("X4^[0,0.4)", "X4^{0.4}", P),
        ("X4^{0.4}", "X4^(0.4,0.8)", P),
        ("X4^(0.4,0.8)", "X4^{0.8}", P),
        ("X4^{0.8}", "X4^(0.8,1]", P),
        // Lagged coupling X2 -> X1 (through the marginalised X3).
        ("X2^(0,0.4)", "X1^(0,0.4)", P),
        ("X2^(0,0.4)", "X1^{0.4}", P),
        ("X2^(0.4,0.8)", "X1^(0.4,0.8)", P),
        ("X2^(0.4,0.8)", "X1^{0.8}", P),
        ("X2^(0.8,1]", "X1^(0.8,1]", P),
        // Lagged coupling X1 -> X2.
        ("X1^(0,0.4)", "X2^(0,0.4)", P),
        ("X1^(0,0.4)", "X2^{0.4}", P),
        ("X1^(0.4,0.8)", "X2^(0.4,0.8)", P),
        ("X1^(0.4,0.8)", "X2^{0.8}", P),
        ("X1^(0.8,1]", "X2^(0.8,1]", P),
        // Integrator edges X2 -> X4: instantaneous in overlapping pieces.
        ("X2^(0,0.4)", "X4^[0,0.4)", A),
        ("X2^(0,0.4)", "X4^{0.4}", P),
        ("X2^{0.4}", "X4^{0.4}", A),
        ("X2^(0.4,0.8)", "X4^(0.4,0.8)", A),
        ("X2^(0.4,0.8)", "X4^{0.8}", P),
        ("X2^{0.8}", "X4^{0.8}", A),
        ("X2^(0.8,1]", "X4^(0.8,1]", A),
        // Drivers reach every piece of their children.
        ("W", "X1^(0,0.4)", A),
        ("W", "X1^{0.4}", A),
        ("W", "X1^(0.4,0.8)", A),
        ("W", "X1^{0.8}", A),
        ("W", "X1^(0.8,1]", A),
        ("N", "X2^(0,0.4)", A),
        ("N", "X2^{0.4}", A),
        ("N", "X2^(0.4,0.8)", A),
        ("N", "X2^{0.8}", A),
        ("N", "X2^(0.8,1]", A),
    ]
}

/// Node set of the subsampled graph at (0, 0.4, 0.8).
pub fn subsample_reference_nodes() -> Vec<&'static str> {
    vec![
        "N", "W", "X1^0", "X1^{0.4}", "X1^{0.8}", "X2^0", "X2^{0.4}", "X2^{0.8}", "X4^{0.4}",
        "X4^{0.8}",
    ]
}

/// The subsampled edges as usually rendered, including the induced
/// cross-process ones (initial values reaching the first sample of other
/// processes, and X2^{0.4} reaching X4^{0.8} through dropped pieces).
pub fn subsample_reference_edges() -> Vec<EdgeRef> {
    vec![
        ("X1^0", "X1^{0.4}", P),
        ("X2^0", "X2^{0.4}", P),
        ("X1^0", "X2^{0.4}", P),
        ("X2^0", "X1^{0.4}", P),
        ("W", "X1^{0.4}", A),
        ("W", "X1^{0.8}", A),
        ("N", "X2^{0.4}", A),
        ("N", "X2^{0.8}", A),
        ("X1^{0.4}", "X2^{0.8}", P),
        ("X2^{0.4}", "X1^{0.8}", P),
        ("X2^0", "X4^{0.4}", P),
        ("X2^{0.4}", "X4^{0.8}", P),
        ("X2^{0.4}", "X4^{0.4}", A),
        ("X2^{0.8}", "X4^{0.8}", A),
        ("X1^{0.4}", "X1^{0.8}", P),
        ("X2^{0.4}", "X2^{0.8}", P),
    ]
}

/// Further edges the substitution projection necessarily carries: the usual
/// rendering de-emphasises driver influence beyond direct children and drops
/// a handful of induced edges, but every one of these follows from composing
/// the retained dependencies.
pub fn subsample_projection_extras() -> Vec<EdgeRef> {
    vec![
        ("X1^0", "X4^{0.4}", P),
        ("X1^{0.4}", "X4^{0.8}", P),
        ("X4^{0.4}", "X4^{0.8}", P),
        ("W", "X2^{0.4}", P),
        ("W", "X2^{0.8}", P),
        ("W", "X4^{0.4}", P),
        ("W", "X4^{0.8}", P),
        ("N", "X1^{0.4}", P),
        ("N", "X1^{0.8}", P),
        ("N", "X4^{0.4}", P),
        ("N", "X4^{0.8}", P),
    ]
}

/// Adjacency skeleton the discovery run must recover from the split-at-zero
/// model: initial values adjacent to every member of the endogenous cycle,
/// each process adjacent to its own initial value, the cycle pairwise
/// adjacent, and X4 tied only to X2 and its own initial value.
pub fn ev0_pag_skeleton() -> Vec<(&'static str, &'static str)> {
    vec![
        ("X1^(0,1]", "X1^0"),
        ("X1^(0,1]", "X2^(0,1]"),
        ("X1^(0,1]", "X2^0"),
        ("X1^(0,1]", "X3^(0,1]"),
        ("X1^(0,1]", "X3^0"),
        ("X1^0", "X2^(0,1]"),
        ("X1^0", "X3^(0,1]"),
        ("X2^(0,1]", "X2^0"),
        ("X2^(0,1]", "X3^(0,1]"),
        ("X2^(0,1]", "X3^0"),
        ("X2^(0,1]", "X4^(0,1]"),
        ("X2^0", "X3^(0,1]"),
        ("X3^(0,1]", "X3^0"),
        ("X4^(0,1]", "X4^0"),
    ]
}

/// Expected endpoint marks: `glyph` reads left-to-right for the pair as
/// listed in [`ev0_pag_skeleton`].
pub fn ev0_pag_glyphs() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        ("X1^(0,1]", "X1^0", "<-o"),
        ("X1^(0,1]", "X2^(0,1]", "o-o"),
        ("X1^(0,1]", "X2^0", "<-o"),
        ("X1^(0,1]", "X3^(0,1]", "o-o"),
        ("X1^(0,1]", "X3^0", "<-o"),
        ("X1^0", "X2^(0,1]", "o->"),
        ("X1^0", "X3^(0,1]", "o->"),
        ("X2^(0,1]", "X2^0", "<-o"),
        ("X2^(0,1]", "X3^(0,1]", "o-o"),
        ("X2^(0,1]", "X3^0", "<-o"),
        ("X2^(0,1]", "X4^(0,1]", "-->"),
        ("X2^0", "X3^(0,1]", "o->"),
        ("X3^(0,1]", "X3^0", "<-o"),
        ("X4^(0,1]", "X4^0", "<-o"),
    ]
}

/// Build a graph from (src, dst, dependence) triples; node names containing
/// `^` but no piece delimiters stay flat strings, which is all comparisons
/// need.
pub fn graph_from_edges(
    endogenous: &[&str],
    exogenous: &[&str],
    edges: &[EdgeRef],
) -> Dmg {
    let mut g = Dmg::new();
    for name in endogenous {
        g.add_node(NodeId::endogenous(*name)).unwrap();
    }
    for name in exogenous {
        g.add_node(NodeId::exogenous(*name)).unwrap();
    }
    for (src, dst, dep) in edges {
        let s = g.require(src).unwrap();
        let d = g.require(dst).unwrap();
        g.add_directed(s, d, *dep).unwrap();
    }
    g
}

/// Canonical (src, kind, dst, dependence) set for a list of directed edges.
pub fn canonical(edges: &[EdgeRef]) -> std::collections::BTreeSet<(String, EdgeKind, String, Dependence)> {
    edges
        .iter()
        .map(|(s, d, dep)| (s.to_string(), EdgeKind::Directed, d.to_string(), *dep))
        .collect()
}
