//! Directed mixed graphs with per-edge dependence kinds, plus the separation
//! and projection algorithms that operate on them.

mod io;
mod project;
mod scc;
mod separation;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::partition::Piece;

pub use io::DotParseError;
pub use separation::SeparationMode;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("invalid edge: {0}")]
    InvalidEdge(String),
    #[error("invalid node set: {0}")]
    InvalidNodeSet(String),
    #[error("graph too large: {0} nodes exceeds the limit of {1}")]
    TooLarge(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Endogenous,
    Exogenous,
    Intervention,
}

/// Whether a dependence may act instantaneously (adapted) or only with a
/// strict lag (predictable). Adapted edges are the "red" edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dependence {
    Predictable,
    Adapted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Directed,
    Bidirected,
}

/// Node identity: a process name, an optional evaluation piece, a role and a
/// flag marking degenerate (deterministic) exogenous variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeId {
    pub process: String,
    pub eval: Option<Piece>,
    pub role: Role,
    pub deterministic: bool,
}

impl NodeId {
    pub fn endogenous(process: impl Into<String>) -> Self {
        NodeId {
            process: process.into(),
            eval: None,
            role: Role::Endogenous,
            deterministic: false,
        }
    }

    pub fn exogenous(process: impl Into<String>) -> Self {
        NodeId {
            process: process.into(),
            eval: None,
            role: Role::Exogenous,
            deterministic: false,
        }
    }

    pub fn intervention(process: impl Into<String>) -> Self {
        NodeId {
            process: process.into(),
            eval: None,
            role: Role::Intervention,
            deterministic: false,
        }
    }

    pub fn with_eval(mut self, piece: Piece) -> Self {
        self.eval = Some(piece);
        self
    }

    pub fn deterministic(mut self) -> Self {
        self.deterministic = true;
        self
    }

    /// Unique display name: `X1` for plain nodes, `X1^{s}` / `X1^(s,t)` for
    /// evaluated nodes.
    pub fn name(&self) -> String {
        match &self.eval {
            None => self.process.clone(),
            Some(p) => format!("{}^{}", self.process, p),
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

pub type NodeIdx = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub kind: EdgeKind,
    pub src: NodeIdx,
    pub dst: NodeIdx,
    pub dependence: Dependence,
}

/// A directed mixed graph. Edges are kept as a set, so parallel edges
/// collapse to one per `(kind, dependence)` pair. Bidirected edges are stored
/// with `src <= dst`.
#[derive(Debug, Clone, Default)]
pub struct Dmg {
    nodes: Vec<NodeId>,
    by_name: BTreeMap<String, NodeIdx>,
    edges: BTreeSet<Edge>,
    notes: Vec<String>,
}

impl Dmg {
    pub fn new() -> Self {
        Dmg::default()
    }

    pub fn add_node(&mut self, node: NodeId) -> Result<NodeIdx, GraphError> {
        let name = node.name();
        if self.by_name.contains_key(&name) {
            return Err(GraphError::DuplicateNode(name));
        }
        let idx = self.nodes.len();
        self.nodes.push(node);
        self.by_name.insert(name, idx);
        Ok(idx)
    }

    pub fn add_directed(
        &mut self,
        src: NodeIdx,
        dst: NodeIdx,
        dependence: Dependence,
    ) -> Result<(), GraphError> {
        self.check_idx(src)?;
        self.check_idx(dst)?;
        if src == dst {
            return Err(GraphError::InvalidEdge(format!(
                "directed self-loop at `{}`",
                self.nodes[src].name()
            )));
        }
        match self.nodes[dst].role {
            Role::Endogenous => {}
            Role::Exogenous => {
                return Err(GraphError::InvalidEdge(format!(
                    "exogenous node `{}` cannot have incoming edges",
                    self.nodes[dst].name()
                )))
            }
            Role::Intervention => {
                return Err(GraphError::InvalidEdge(format!(
                    "intervention node `{}` cannot have incoming edges",
                    self.nodes[dst].name()
                )))
            }
        }
        self.edges.insert(Edge {
            kind: EdgeKind::Directed,
            src,
            dst,
            dependence,
        });
        Ok(())
    }

    pub fn add_bidirected(
        &mut self,
        a: NodeIdx,
        b: NodeIdx,
        dependence: Dependence,
    ) -> Result<(), GraphError> {
        self.check_idx(a)?;
        self.check_idx(b)?;
        if a == b {
            return Err(GraphError::InvalidEdge(format!(
                "bidirected self-loop at `{}`",
                self.nodes[a].name()
            )));
        }
        for n in [a, b] {
            if self.nodes[n].role != Role::Endogenous {
                return Err(GraphError::InvalidEdge(format!(
                    "bidirected edge touches non-endogenous node `{}`",
                    self.nodes[n].name()
                )));
            }
        }
        let (src, dst) = if a <= b { (a, b) } else { (b, a) };
        self.edges.insert(Edge {
            kind: EdgeKind::Bidirected,
            src,
            dst,
            dependence,
        });
        Ok(())
    }

    fn check_idx(&self, idx: NodeIdx) -> Result<(), GraphError> {
        if idx >= self.nodes.len() {
            return Err(GraphError::UnknownNode(format!("#{idx}")));
        }
        Ok(())
    }

    pub fn add_note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, idx: NodeIdx) -> &NodeId {
        &self.nodes[idx]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeIdx, &NodeId)> {
        self.nodes.iter().enumerate()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn index_of(&self, name: &str) -> Option<NodeIdx> {
        self.by_name.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<NodeIdx, GraphError> {
        self.index_of(name)
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn resolve_set(&self, names: &[&str]) -> Result<BTreeSet<NodeIdx>, GraphError> {
        names.iter().map(|n| self.require(n)).collect()
    }

    /// Children via directed edges.
    pub fn children_of(&self, v: NodeIdx) -> BTreeSet<NodeIdx> {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Directed && e.src == v)
            .map(|e| e.dst)
            .collect()
    }

    /// Parents via directed edges.
    pub fn parents_of(&self, v: NodeIdx) -> BTreeSet<NodeIdx> {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Directed && e.dst == v)
            .map(|e| e.src)
            .collect()
    }

    pub fn has_directed(&self, src: &str, dst: &str) -> bool {
        match (self.index_of(src), self.index_of(dst)) {
            (Some(s), Some(d)) => self
                .edges
                .iter()
                .any(|e| e.kind == EdgeKind::Directed && e.src == s && e.dst == d),
            _ => false,
        }
    }

    pub fn has_bidirected(&self, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(x), Some(y)) => {
                let (s, d) = if x <= y { (x, y) } else { (y, x) };
                self.edges
                    .iter()
                    .any(|e| e.kind == EdgeKind::Bidirected && e.src == s && e.dst == d)
            }
            _ => false,
        }
    }

    /// Edge multiset keyed by node names, for structural comparison that is
    /// independent of insertion order.
    pub fn canonical_edges(&self) -> BTreeSet<(String, EdgeKind, String, Dependence)> {
        self.edges
            .iter()
            .map(|e| {
                let s = self.nodes[e.src].name();
                let d = self.nodes[e.dst].name();
                if e.kind == EdgeKind::Bidirected && s > d {
                    (d, e.kind, s, e.dependence)
                } else {
                    (s, e.kind, d, e.dependence)
                }
            })
            .collect()
    }

    pub fn canonical_nodes(&self) -> BTreeMap<String, (Role, bool)> {
        self.nodes
            .iter()
            .map(|n| (n.name(), (n.role, n.deterministic)))
            .collect()
    }

    /// Ancestors of `seed` including `seed` itself (reflexive-transitive
    /// closure over reversed directed edges).
    pub fn ancestors(&self, seed: &BTreeSet<NodeIdx>) -> BTreeSet<NodeIdx> {
        let mut out = seed.clone();
        let mut stack: Vec<NodeIdx> = seed.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                if e.kind == EdgeKind::Directed && e.dst == v && out.insert(e.src) {
                    stack.push(e.src);
                }
            }
        }
        out
    }

    pub fn ancestors_by_name(&self, names: &[&str]) -> Result<BTreeSet<String>, GraphError> {
        let seed = self.resolve_set(names)?;
        Ok(self
            .ancestors(&seed)
            .into_iter()
            .map(|i| self.nodes[i].name())
            .collect())
    }

    /// Remove all edges into each target: directed heads and bidirected ends.
    /// Graph-level perfect intervention.
    pub fn intervene(&self, targets: &BTreeSet<NodeIdx>) -> Result<Dmg, GraphError> {
        for &t in targets {
            self.check_idx(t)?;
            if self.nodes[t].role != Role::Endogenous {
                return Err(GraphError::InvalidNodeSet(format!(
                    "intervention target `{}` is not endogenous",
                    self.nodes[t].name()
                )));
            }
        }
        let mut out = self.clone();
        out.edges.retain(|e| match e.kind {
            EdgeKind::Directed => !targets.contains(&e.dst),
            EdgeKind::Bidirected => !targets.contains(&e.src) && !targets.contains(&e.dst),
        });
        Ok(out)
    }

    /// Check structural invariants: intervention nodes have exactly one
    /// outgoing directed edge and nothing else incident.
    pub fn validate(&self) -> Result<(), GraphError> {
        for (i, n) in self.nodes.iter().enumerate() {
            if n.role == Role::Intervention {
                let out: Vec<_> = self
                    .edges
                    .iter()
                    .filter(|e| e.src == i || e.dst == i)
                    .collect();
                if out.len() != 1
                    || out[0].kind != EdgeKind::Directed
                    || out[0].src != i
                {
                    return Err(GraphError::InvalidEdge(format!(
                        "intervention node `{}` must have exactly one outgoing edge",
                        n.name()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Project out exogenous nodes: each stochastic exogenous node with two or
    /// more endogenous children induces a bidirected edge between every pair
    /// of its children, adapted when both contributing edges are adapted.
    /// Deterministic exogenous nodes (`time`, `constant`, degenerate initial
    /// laws) are dropped without inducing confounding.
    pub fn to_dmg(&self) -> Dmg {
        let mut out = Dmg::new();
        let mut map: BTreeMap<NodeIdx, NodeIdx> = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.role == Role::Exogenous {
                continue;
            }
            let idx = out.add_node(n.clone()).expect("unique in source graph");
            map.insert(i, idx);
        }
        for e in &self.edges {
            if let (Some(&s), Some(&d)) = (map.get(&e.src), map.get(&e.dst)) {
                match e.kind {
                    EdgeKind::Directed => out.add_directed(s, d, e.dependence).unwrap(),
                    EdgeKind::Bidirected => out.add_bidirected(s, d, e.dependence).unwrap(),
                }
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.role != Role::Exogenous || n.deterministic {
                continue;
            }
            let children: Vec<(NodeIdx, Dependence)> = self
                .edges
                .iter()
                .filter(|e| e.kind == EdgeKind::Directed && e.src == i)
                .filter_map(|e| map.get(&e.dst).map(|&d| (d, e.dependence)))
                .collect();
            for (ai, &(a, da)) in children.iter().enumerate() {
                for &(b, db) in children.iter().skip(ai + 1) {
                    if a == b {
                        continue;
                    }
                    let dep = if da == Dependence::Adapted && db == Dependence::Adapted {
                        Dependence::Adapted
                    } else {
                        Dependence::Predictable
                    };
                    out.add_bidirected(a, b, dep).unwrap();
                }
            }
        }
        out
    }
}

impl PartialEq for Dmg {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_nodes() == other.canonical_nodes()
            && self.canonical_edges() == other.canonical_edges()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::fixtures;

    #[test]
    fn ancestors_on_cyclic_demo_graph() {
        let g = fixtures::cyclic4_augmented();
        let anc = g.ancestors_by_name(&["X4"]).unwrap();
        let expect: BTreeSet<String> = [
            "X1", "X2", "X3", "X4", "W", "N", "X1^0", "X2^0", "X3^0", "X4^0",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        assert_eq!(anc, expect);
    }

    #[test]
    fn ancestors_of_empty_set_is_empty() {
        let g = fixtures::cyclic4_augmented();
        assert!(g.ancestors(&BTreeSet::new()).is_empty());
    }

    #[test]
    fn ancestors_of_all_nodes_is_all_nodes() {
        let g = fixtures::cyclic4_augmented();
        let all: BTreeSet<NodeIdx> = (0..g.node_count()).collect();
        assert_eq!(g.ancestors(&all), all);
    }

    #[test]
    fn to_dmg_single_child_induces_nothing() {
        let mut g = Dmg::new();
        let w = g.add_node(NodeId::exogenous("W")).unwrap();
        let x = g.add_node(NodeId::endogenous("X")).unwrap();
        g.add_directed(w, x, Dependence::Adapted).unwrap();
        let d = g.to_dmg();
        assert_eq!(d.node_count(), 1);
        assert_eq!(d.edges().count(), 0);
    }

    #[test]
    fn to_dmg_three_children_pairwise_closure() {
        let mut g = Dmg::new();
        let w = g.add_node(NodeId::exogenous("W")).unwrap();
        let xs: Vec<_> = (1..=3)
            .map(|i| g.add_node(NodeId::endogenous(format!("X{i}"))).unwrap())
            .collect();
        for &x in &xs {
            g.add_directed(w, x, Dependence::Adapted).unwrap();
        }
        let d = g.to_dmg();
        let bidirected = d.edges().filter(|e| e.kind == EdgeKind::Bidirected).count();
        assert_eq!(bidirected, 3);
    }

    #[test]
    fn to_dmg_skips_deterministic_exogenous() {
        let mut g = Dmg::new();
        let t = g.add_node(NodeId::exogenous("T").deterministic()).unwrap();
        let a = g.add_node(NodeId::endogenous("A")).unwrap();
        let b = g.add_node(NodeId::endogenous("B")).unwrap();
        g.add_directed(t, a, Dependence::Adapted).unwrap();
        g.add_directed(t, b, Dependence::Adapted).unwrap();
        let d = g.to_dmg();
        assert_eq!(d.edges().count(), 0);
    }

    #[test]
    fn directed_self_loops_rejected() {
        let mut g = Dmg::new();
        let x = g.add_node(NodeId::endogenous("X")).unwrap();
        assert!(g.add_directed(x, x, Dependence::Predictable).is_err());
    }

    #[test]
    fn exogenous_cannot_receive_edges() {
        let mut g = Dmg::new();
        let x = g.add_node(NodeId::endogenous("X")).unwrap();
        let w = g.add_node(NodeId::exogenous("W")).unwrap();
        assert!(g.add_directed(x, w, Dependence::Predictable).is_err());
    }

    #[test]
    fn intervene_removes_incoming_only() {
        let g = fixtures::cyclic4_dmg();
        let t = [g.require("X2").unwrap()].into_iter().collect();
        let cut = g.intervene(&t).unwrap();
        assert!(!cut.has_directed("X1", "X2"));
        assert!(cut.has_directed("X2", "X3"));
        assert!(cut.has_directed("X2", "X4"));
    }
}
