//! Time-splitting, subsampling, collapsing and marginalisation of model
//! graphs over an evaluation partition.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::dmg::{Dependence, Dmg, EdgeKind, GraphError, NodeId, NodeIdx, Role};
use crate::model::{init_node_name, SdeSystem};
use crate::partition::{EvalPartition, PartitionError, Piece, TimeVal};

#[derive(Debug, Error)]
pub enum TimeOpsError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("time-splitting a graph with bidirected edges between endogenous processes is not supported")]
    BidirectedBase,
}

/// Edge-generation mode for time-split graphs.
///
/// `Strict` follows the argument sets of the split structural equations:
/// α-parents connect from every piece with a strictly earlier time, β-parents
/// from every piece with a weakly earlier time (adapted when the pieces
/// overlap), Markov processes pruned to the co-piece and the immediately
/// preceding piece.
///
/// `Figure` additionally drops cross-process edges out of singleton pieces
/// into later interval pieces, and identifies the `{0}` piece of a process
/// with its initial-value variable, matching the usual rendering of these
/// graphs. The definition licenses the dropped edges, so `Strict` is the
/// default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitMode {
    #[default]
    Strict,
    Figure,
}

/// Per-process metadata the splitter needs from the model.
#[derive(Debug, Clone)]
pub struct SplitMeta {
    /// Markov flag per endogenous process.
    pub markov: BTreeMap<String, bool>,
    /// Initial-value exogenous node name per process, when present in the
    /// base graph.
    pub initials: BTreeMap<String, String>,
}

impl SplitMeta {
    pub fn from_system(sys: &SdeSystem) -> Self {
        let markov = sys
            .processes
            .iter()
            .map(|p| (p.name.clone(), p.markov))
            .collect();
        let initials = sys
            .processes
            .iter()
            .filter(|p| !p.init.is_deterministic())
            .map(|p| (p.name.clone(), init_node_name(&p.name)))
            .collect();
        SplitMeta { markov, initials }
    }

    /// Conservative metadata for a bare graph: nothing Markov, no initials.
    pub fn conservative() -> Self {
        SplitMeta {
            markov: BTreeMap::new(),
            initials: BTreeMap::new(),
        }
    }
}

/// A graph over (process, piece) nodes, remembering the partition and the
/// per-process node layout.
#[derive(Debug, Clone)]
pub struct SplitGraph {
    pub graph: Dmg,
    pub partition: EvalPartition,
    /// For each endogenous process, its piece nodes in time order, each
    /// covering a contiguous span of partition indices.
    layout: BTreeMap<String, Vec<PieceNode>>,
    /// Exogenous (and merged initial) node names of the base graph.
    exogenous: Vec<String>,
}

#[derive(Debug, Clone)]
struct PieceNode {
    piece: Piece,
    /// Partition indices covered.
    span: (usize, usize),
    node: NodeIdx,
}

impl SplitGraph {
    /// Nodes representing singleton pieces, by name.
    pub fn point_nodes(&self) -> Vec<String> {
        let mut out = Vec::new();
        for nodes in self.layout.values() {
            for pn in nodes {
                if pn.piece.is_point() {
                    out.push(self.graph.node(pn.node).name());
                }
            }
        }
        out.sort();
        out
    }

    /// Nodes representing non-singleton pieces, by name.
    pub fn interval_nodes(&self) -> Vec<String> {
        let mut out = Vec::new();
        for nodes in self.layout.values() {
            for pn in nodes {
                if !pn.piece.is_point() {
                    out.push(self.graph.node(pn.node).name());
                }
            }
        }
        out.sort();
        out
    }
}

/// Refine `base` so that every time in `tau` is a singleton piece.
pub fn split_partition(
    tau: &[TimeVal],
    base: &EvalPartition,
) -> Result<EvalPartition, TimeOpsError> {
    Ok(base.split(tau)?)
}

/// Build the time-split graph of an augmented model graph.
pub fn time_split_graph(
    base: &Dmg,
    meta: &SplitMeta,
    tau: &[TimeVal],
    horizon: f64,
    mode: SplitMode,
) -> Result<SplitGraph, TimeOpsError> {
    let partition = EvalPartition::whole(horizon).split(tau)?;

    // Classify base nodes.
    let mut endo: Vec<NodeIdx> = Vec::new();
    let mut exo: Vec<NodeIdx> = Vec::new();
    for (i, n) in base.nodes() {
        match n.role {
            Role::Endogenous => endo.push(i),
            Role::Exogenous => exo.push(i),
            Role::Intervention => {
                return Err(TimeOpsError::Graph(GraphError::InvalidNodeSet(
                    "cannot time-split a graph with intervention nodes".into(),
                )))
            }
        }
    }
    // Metadata for processes the graph no longer contains (marginalised
    // away) is simply unused; graph processes without metadata default to
    // non-Markov with no initial variable.
    for e in base.edges() {
        if e.kind == EdgeKind::Bidirected {
            return Err(TimeOpsError::BidirectedBase);
        }
    }

    let mut g = Dmg::new();
    let mut layout: BTreeMap<String, Vec<PieceNode>> = BTreeMap::new();
    let mut exo_map: BTreeMap<NodeIdx, NodeIdx> = BTreeMap::new();

    // In figure mode, initial-value variables merge with the {0} piece of
    // their process; the merged node keeps the initial-value name and the
    // exogenous source disappears.
    let mut merged_initials: BTreeSet<String> = BTreeSet::new();
    let zero_piece_idx = partition.pieces().iter().position(|p| match p {
        Piece::Point(t) => t.value == 0.0,
        _ => false,
    });

    for &x in &exo {
        let n = base.node(x);
        let is_initial = meta
            .initials
            .values()
            .any(|init_name| *init_name == n.name());
        if mode == SplitMode::Figure && is_initial && zero_piece_idx.is_some() {
            merged_initials.insert(n.name());
            continue;
        }
        let idx = g.add_node(n.clone())?;
        exo_map.insert(x, idx);
    }

    for &v in &endo {
        let process = base.node(v).name();
        let mut nodes = Vec::new();
        let has_initial = meta
            .initials
            .get(&process)
            .map(|init| merged_initials.contains(init))
            .unwrap_or(false);
        let mut i = 0usize;
        while i < partition.pieces().len() {
            let piece = &partition.pieces()[i];
            if mode == SplitMode::Figure && Some(i) == zero_piece_idx {
                if has_initial {
                    // The {0} piece is the initial value itself.
                    let name = meta.initials[&process].clone();
                    let node = g.add_node(NodeId {
                        process: name,
                        eval: None,
                        role: Role::Endogenous,
                        deterministic: false,
                    })?;
                    nodes.push(PieceNode {
                        piece: piece.clone(),
                        span: (i, i),
                        node,
                    });
                    i += 1;
                    continue;
                }
                // No initial variable: absorb {0} into the following piece.
                if let Some(next) = partition.pieces().get(i + 1) {
                    let merged = Piece::Interval {
                        lo: TimeVal::new(0.0),
                        hi: TimeVal::new(next.sup()),
                        lo_closed: true,
                        hi_closed: next.sup_attained(),
                    };
                    let node = g.add_node(
                        NodeId::endogenous(process.clone()).with_eval(merged.clone()),
                    )?;
                    nodes.push(PieceNode {
                        piece: merged,
                        span: (i, i + 1),
                        node,
                    });
                    i += 2;
                    continue;
                }
            }
            let eval = if partition.pieces().len() == 1 {
                None
            } else {
                Some(piece.clone())
            };
            let node = g.add_node(NodeId {
                process: process.clone(),
                eval,
                role: Role::Endogenous,
                deterministic: false,
            })?;
            nodes.push(PieceNode {
                piece: piece.clone(),
                span: (i, i),
                node,
            });
            i += 1;
        }
        layout.insert(process, nodes);
    }

    // Edge construction.
    for &v in &endo {
        let process = base.node(v).name();
        let markov = meta.markov.get(&process).copied().unwrap_or(false);
        let pieces: Vec<PieceNode> = layout[&process].clone();
        for (ti, target) in pieces.iter().enumerate() {
            // (a) continuation from earlier pieces of the same process.
            for (si, source) in pieces.iter().enumerate().take(ti) {
                if markov && si + 1 != ti {
                    continue;
                }
                g.add_directed(source.node, target.node, Dependence::Predictable)?;
            }

            // Merged initial-value nodes are the process value at time zero,
            // which is the initial variable itself: a source.
            let merged_initial_target = mode == SplitMode::Figure
                && target.piece.is_point()
                && target.piece.inf() == 0.0;

            // (b)/(c) cross-process α and β edges.
            for e in base.edges() {
                if merged_initial_target {
                    break;
                }
                if e.kind != EdgeKind::Directed || e.dst != v {
                    continue;
                }
                let src = e.src;
                match base.node(src).role {
                    Role::Exogenous => continue, // handled below
                    _ => {}
                }
                if src == v {
                    continue;
                }
                let src_process = base.node(src).name();
                let src_pieces = &layout[&src_process];
                for source in src_pieces.iter() {
                    let qualifies = match e.dependence {
                        // α: strictly earlier times exist.
                        Dependence::Predictable => source.piece.exists_lt(&target.piece),
                        // β: weakly earlier times exist.
                        Dependence::Adapted => source.piece.exists_le(&target.piece),
                    };
                    if !qualifies {
                        continue;
                    }
                    if markov
                        && !source.piece.overlaps(&target.piece)
                        && !is_immediate_predecessor(source, target)
                    {
                        continue;
                    }
                    if mode == SplitMode::Figure
                        && source.piece.is_point()
                        && !target.piece.is_point()
                    {
                        continue;
                    }
                    let dep = if e.dependence == Dependence::Adapted
                        && source.piece.overlaps(&target.piece)
                    {
                        Dependence::Adapted
                    } else {
                        Dependence::Predictable
                    };
                    g.add_directed(source.node, target.node, dep)?;
                }
            }

            // Exogenous parents.
            for e in base.edges() {
                if e.kind != EdgeKind::Directed || e.dst != v {
                    continue;
                }
                let n = base.node(e.src);
                if n.role != Role::Exogenous {
                    continue;
                }
                let name = n.name();
                if merged_initials.contains(&name) {
                    continue; // became the {0} piece; continuation covers it
                }
                let is_initial = meta.initials.get(&process) == Some(&name);
                if is_initial {
                    // Initial values materialise at 0 and feed the first piece.
                    if ti == 0 {
                        g.add_directed(exo_map[&e.src], target.node, Dependence::Predictable)?;
                    }
                } else {
                    // Drivers reach every piece. In figure mode the {0} piece
                    // equals the initial value, which drivers do not enter.
                    if mode == SplitMode::Figure
                        && target.piece.is_point()
                        && target.piece.inf() == 0.0
                    {
                        continue;
                    }
                    g.add_directed(exo_map[&e.src], target.node, e.dependence)?;
                }
            }
        }
    }

    let exogenous = exo_map
        .values()
        .map(|&i| g.node(i).name())
        .collect::<Vec<_>>();

    Ok(SplitGraph {
        graph: g,
        partition,
        layout,
        exogenous,
    })
}

fn is_immediate_predecessor(source: &PieceNode, target: &PieceNode) -> bool {
    let (_, shi) = source.span;
    let (tlo, _) = target.span;
    shi + 1 == tlo
}

/// Marginalise all non-singleton pieces out of a split graph; the result has
/// one node per (process, point) pair plus the untouched exogenous nodes.
///
/// Piece nodes are deterministic given their explicit parents (their noise
/// sources remain behind as exogenous nodes), so marginalising them composes
/// directed dependence only and induces no bidirected edges.
pub fn subsample_graph(sg: &SplitGraph) -> Result<Dmg, TimeOpsError> {
    let drop: BTreeSet<NodeIdx> = sg
        .interval_nodes()
        .iter()
        .map(|n| sg.graph.require(n))
        .collect::<Result<_, _>>()?;
    Ok(sg.graph.substitute_project(&drop)?)
}

/// Concatenate the pieces of every process back into a single node. Inverse
/// of time-splitting on graphs.
pub fn collapse_graph(sg: &SplitGraph) -> Result<Dmg, TimeOpsError> {
    // The stored partition is valid by construction; re-check to honour the
    // contract for hand-built values.
    EvalPartition::from_pieces(sg.partition.pieces().to_vec(), sg.partition.horizon())?;

    let mut g = Dmg::new();
    let mut map: BTreeMap<NodeIdx, NodeIdx> = BTreeMap::new();
    for name in &sg.exogenous {
        let src = sg.graph.require(name)?;
        let idx = g.add_node(sg.graph.node(src).clone())?;
        map.insert(src, idx);
    }
    for (process, nodes) in &sg.layout {
        let idx = g.add_node(NodeId::endogenous(process.clone()))?;
        for pn in nodes {
            map.insert(pn.node, idx);
        }
    }
    // Collect best dependence per collapsed pair: adapted wins.
    let mut best: BTreeMap<(NodeIdx, NodeIdx), Dependence> = BTreeMap::new();
    for e in sg.graph.edges() {
        let s = map[&e.src];
        let d = map[&e.dst];
        if s == d {
            continue;
        }
        let entry = best.entry((s, d)).or_insert(Dependence::Predictable);
        if e.dependence == Dependence::Adapted {
            *entry = Dependence::Adapted;
        }
    }
    for ((s, d), dep) in best {
        g.add_directed(s, d, dep)?;
    }
    Ok(g)
}

/// Graph-level marginalisation: latent projection over the dropped nodes.
pub fn marginalise_graph(g: &Dmg, drop: &[&str]) -> Result<Dmg, TimeOpsError> {
    Ok(g.latent_project_by_name(drop)?)
}

/// Graph-level perfect intervention: delete all edges into the targets.
pub fn intervene_graph(g: &Dmg, targets: &[&str]) -> Result<Dmg, TimeOpsError> {
    let set = g.resolve_set(targets)?;
    Ok(g.intervene(&set)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use crate::verify::fixtures;

    fn tv(v: f64) -> TimeVal {
        TimeVal::new(v)
    }

    #[test]
    fn empty_tau_reproduces_base_graph() {
        let sys = parse_model(fixtures::CYCLIC4_MODEL).unwrap().system;
        let base = sys.graph_of_sdes();
        let meta = SplitMeta::from_system(&sys);
        let sg = time_split_graph(&base, &meta, &[], sys.horizon, SplitMode::Strict).unwrap();
        assert_eq!(sg.graph, base);
    }

    #[test]
    fn two_process_chain_single_split() {
        let text = "system {
            exogenous W: brownian;
            process U { init = normal(0,1); alpha = {U}; beta = {W}; g = [U]; markov = true; }
            process V { init = normal(0,1); alpha = {U, V}; beta = {W}; g = [V]; markov = true; }
            horizon 1;
        }";
        let sys = parse_model(text).unwrap().system;
        let base = sys.graph_of_sdes();
        let meta = SplitMeta::from_system(&sys);
        let sg =
            time_split_graph(&base, &meta, &[tv(0.5)], sys.horizon, SplitMode::Strict).unwrap();
        // Pieces [0,0.5), {0.5}, (0.5,1] for both processes.
        let endo: Vec<_> = sg
            .graph
            .nodes()
            .filter(|(_, n)| n.role == Role::Endogenous)
            .collect();
        assert_eq!(endo.len(), 6);
        // All inter-piece directed edges run forward in time.
        for e in sg.graph.edges() {
            let (s, d) = (sg.graph.node(e.src), sg.graph.node(e.dst));
            if let (Some(sp), Some(dp)) = (&s.eval, &d.eval) {
                assert!(
                    sp.inf() <= dp.inf(),
                    "backward edge {} -> {}",
                    s.name(),
                    d.name()
                );
            }
        }
        // Hand-derived α-edges from U into V.
        let g = &sg.graph;
        assert!(g.has_directed("U^[0,0.5)", "V^[0,0.5)"));
        assert!(g.has_directed("U^[0,0.5)", "V^{0.5}"));
        assert!(g.has_directed("U^(0.5,1]", "V^(0.5,1]"));
        assert!(!g.has_directed("U^{0.5}", "V^{0.5}"));
        assert!(g.has_directed("U^{0.5}", "V^(0.5,1]"));
    }

    #[test]
    fn markov_pruning_is_a_subset_of_strict() {
        let sys = parse_model(fixtures::CYCLIC4_MODEL).unwrap().system;
        let base = sys.graph_of_sdes();
        let mut meta = SplitMeta::from_system(&sys);
        let tau = [tv(0.3), tv(0.7)];
        let pruned =
            time_split_graph(&base, &meta, &tau, sys.horizon, SplitMode::Strict).unwrap();
        for flag in meta.markov.values_mut() {
            *flag = false;
        }
        let full = time_split_graph(&base, &meta, &tau, sys.horizon, SplitMode::Strict).unwrap();
        let pruned_edges = pruned.graph.canonical_edges();
        let full_edges = full.graph.canonical_edges();
        assert!(pruned_edges.is_subset(&full_edges));
        assert!(pruned_edges.len() < full_edges.len());
    }

    #[test]
    fn collapse_inverts_split() {
        let sys = parse_model(fixtures::CYCLIC4_MODEL).unwrap().system;
        let base = sys.graph_of_sdes();
        let meta = SplitMeta::from_system(&sys);
        for tau in [vec![], vec![tv(0.5)], vec![tv(0.2), tv(0.4), tv(0.9)]] {
            let sg =
                time_split_graph(&base, &meta, &tau, sys.horizon, SplitMode::Strict).unwrap();
            assert_eq!(collapse_graph(&sg).unwrap(), base);
        }
    }

    #[test]
    fn single_piece_collapse_is_identity() {
        let sys = parse_model(fixtures::CYCLIC4_MODEL).unwrap().system;
        let base = sys.graph_of_sdes();
        let meta = SplitMeta::from_system(&sys);
        let sg = time_split_graph(&base, &meta, &[], sys.horizon, SplitMode::Strict).unwrap();
        assert_eq!(collapse_graph(&sg).unwrap(), base);
    }

    #[test]
    fn subsample_node_set_is_processes_times_points() {
        let sys = parse_model(fixtures::CYCLIC4_MODEL).unwrap().system;
        let base = sys.graph_of_sdes();
        let meta = SplitMeta::from_system(&sys);
        let sg = time_split_graph(
            &base,
            &meta,
            &[tv(0.4), tv(0.8)],
            sys.horizon,
            SplitMode::Strict,
        )
        .unwrap();
        let sub = subsample_graph(&sg).unwrap();
        let endo: Vec<String> = sub
            .nodes()
            .filter(|(_, n)| n.role == Role::Endogenous)
            .map(|(_, n)| n.name())
            .collect();
        assert_eq!(endo.len(), 8); // 4 processes x 2 points
        for name in endo {
            assert!(name.contains("^{"), "unexpected node {name}");
        }
    }

    #[test]
    fn subsample_with_no_intervals_is_identity() {
        // A split whose every piece is a point cannot arise from a real
        // horizon, so check the trivial direction: no split points on a
        // point-free partition means nothing to drop beyond the whole graph.
        let sys = parse_model(fixtures::CYCLIC4_MODEL).unwrap().system;
        let base = sys.graph_of_sdes();
        let meta = SplitMeta::from_system(&sys);
        let sg = time_split_graph(&base, &meta, &[], sys.horizon, SplitMode::Strict).unwrap();
        assert!(sg.point_nodes().is_empty());
        let sub = subsample_graph(&sg).unwrap();
        let endo = sub
            .nodes()
            .filter(|(_, n)| n.role == Role::Endogenous)
            .count();
        assert_eq!(endo, 0);
    }

    #[test]
    fn chain_point_reached_through_interval() {
        let text = "system {
            exogenous W: brownian;
            process U { init = normal(0,1); alpha = {U}; beta = {W}; g = [U]; markov = true; }
            process V { init = normal(0,1); alpha = {U, V}; beta = {W}; g = [V]; markov = true; }
            horizon 1;
        }";
        let sys = parse_model(text).unwrap().system;
        let base = sys.graph_of_sdes();
        let meta = SplitMeta::from_system(&sys);
        let sg = time_split_graph(
            &base,
            &meta,
            &[tv(0.3), tv(0.6)],
            sys.horizon,
            SplitMode::Strict,
        )
        .unwrap();
        let sub = subsample_graph(&sg).unwrap();
        // U(0.3) influences V(0.6) through the dropped (0.3,0.6) pieces.
        assert!(sub.has_directed("U^{0.3}", "V^{0.6}"));
    }

    #[test]
    fn marginalise_empty_is_identity() {
        let g = fixtures::cyclic4_dmg();
        assert_eq!(marginalise_graph(&g, &[]).unwrap(), g);
    }

    #[test]
    fn intervene_graph_removes_incoming() {
        let g = fixtures::cyclic4_dmg();
        let cut = intervene_graph(&g, &["X2"]).unwrap();
        assert!(!cut.has_directed("X1", "X2"));
        assert!(cut.has_directed("X2", "X3"));
        assert!(cut.has_directed("X2", "X4"));
    }
}
