//! σ- and d-separation on directed mixed graphs, computed as a reachability
//! search over (node, incoming-mark) states. Walks are unbounded; the search
//! terminates by memoising visited states.

use std::collections::BTreeSet;

use super::{Dmg, EdgeKind, GraphError, NodeIdx};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationMode {
    /// Non-colliders block only when they have a child on the walk outside
    /// their strongly connected component.
    Sigma,
    /// Every non-collider in the conditioning set blocks.
    D,
}

/// How the walk arrived at the current node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry {
    /// Arriving edge has an arrowhead at the current node.
    Head,
    /// Arriving edge has a tail here, so the previous node is a child; the
    /// flag records whether that child lies in the same SCC.
    Tail { child_same_scc: bool },
}

impl Dmg {
    pub fn sigma_separated(
        &self,
        a: &BTreeSet<NodeIdx>,
        b: &BTreeSet<NodeIdx>,
        c: &BTreeSet<NodeIdx>,
    ) -> bool {
        !self.connected(a, b, c, SeparationMode::Sigma)
    }

    pub fn d_separated(
        &self,
        a: &BTreeSet<NodeIdx>,
        b: &BTreeSet<NodeIdx>,
        c: &BTreeSet<NodeIdx>,
    ) -> bool {
        !self.connected(a, b, c, SeparationMode::D)
    }

    pub fn separated_by_name(
        &self,
        a: &[&str],
        b: &[&str],
        c: &[&str],
        mode: SeparationMode,
    ) -> Result<bool, GraphError> {
        let a = self.resolve_set(a)?;
        let b = self.resolve_set(b)?;
        let c = self.resolve_set(c)?;
        Ok(!self.connected(&a, &b, &c, mode))
    }

    /// True when some walk between `a` and `b` is left open by `c`.
    ///
    /// The sets need not be disjoint. A trivial (single-node) walk connects
    /// any shared member of `a` and `b`, so overlapping `a`, `b` are never
    /// separated; endpoints themselves are not blocked by membership in `c`.
    pub fn connected(
        &self,
        a: &BTreeSet<NodeIdx>,
        b: &BTreeSet<NodeIdx>,
        c: &BTreeSet<NodeIdx>,
        mode: SeparationMode,
    ) -> bool {
        if a.iter().any(|x| b.contains(x)) {
            return true;
        }
        let anc_c = self.ancestors(c);
        let scc = self.scc_ids();

        // visited[(node, entry-code)]: 0 = head, 1 = tail same-scc, 2 = tail cross-scc
        let mut visited = vec![[false; 3]; self.node_count()];
        let mut queue: Vec<(NodeIdx, Entry)> = Vec::new();

        let push = |queue: &mut Vec<(NodeIdx, Entry)>,
                        visited: &mut Vec<[bool; 3]>,
                        node: NodeIdx,
                        entry: Entry| {
            let code = match entry {
                Entry::Head => 0,
                Entry::Tail {
                    child_same_scc: true,
                } => 1,
                Entry::Tail {
                    child_same_scc: false,
                } => 2,
            };
            if !visited[node][code] {
                visited[node][code] = true;
                queue.push((node, entry));
            }
        };

        for &start in a {
            for e in self.edges() {
                let other = match e.kind {
                    EdgeKind::Directed if e.src == start => Some((e.dst, Entry::Head)),
                    EdgeKind::Directed if e.dst == start => Some((
                        e.src,
                        Entry::Tail {
                            child_same_scc: scc[e.src] == scc[start],
                        },
                    )),
                    EdgeKind::Bidirected if e.src == start => Some((e.dst, Entry::Head)),
                    EdgeKind::Bidirected if e.dst == start => Some((e.src, Entry::Head)),
                    _ => None,
                };
                if let Some((node, entry)) = other {
                    push(&mut queue, &mut visited, node, entry);
                }
            }
        }

        while let Some((v, entry)) = queue.pop() {
            // Blocking applies to interior nodes only, so any arrival at a
            // target node completes an open walk.
            if b.contains(&v) {
                return true;
            }
            // Extend the walk through v; v is now an interior node.
            for e in self.edges() {
                // (next node, mark of the outgoing edge at v, mark at next)
                let step = match e.kind {
                    EdgeKind::Directed if e.src == v => Some((e.dst, Mark::Tail, Mark::Head)),
                    EdgeKind::Directed if e.dst == v => Some((e.src, Mark::Head, Mark::Tail)),
                    EdgeKind::Bidirected if e.src == v => Some((e.dst, Mark::Head, Mark::Head)),
                    EdgeKind::Bidirected if e.dst == v => Some((e.src, Mark::Head, Mark::Head)),
                    _ => None,
                };
                let Some((next, at_v, at_next)) = step else {
                    continue;
                };
                let collider = entry == Entry::Head && at_v == Mark::Head;
                if collider {
                    if !anc_c.contains(&v) {
                        continue;
                    }
                } else if c.contains(&v) {
                    let blocked = match mode {
                        SeparationMode::D => true,
                        SeparationMode::Sigma => {
                            let in_child_cross = matches!(
                                entry,
                                Entry::Tail {
                                    child_same_scc: false
                                }
                            );
                            let out_child_cross = at_v == Mark::Tail && scc[next] != scc[v];
                            in_child_cross || out_child_cross
                        }
                    };
                    if blocked {
                        continue;
                    }
                }
                let next_entry = match at_next {
                    Mark::Head => Entry::Head,
                    Mark::Tail => Entry::Tail {
                        child_same_scc: scc[v] == scc[next],
                    },
                };
                push(&mut queue, &mut visited, next, next_entry);
            }
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Head,
    Tail,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmg::{Dependence, NodeId};
    use crate::verify::fixtures;

    fn sep(g: &Dmg, a: &[&str], b: &[&str], c: &[&str], mode: SeparationMode) -> bool {
        g.separated_by_name(a, b, c, mode).unwrap()
    }

    #[test]
    fn demo_graph_d_separates_but_sigma_connects() {
        let g = fixtures::cyclic4_augmented();
        assert!(sep(&g, &["X1^0"], &["X2^0"], &["X1", "X2"], SeparationMode::D));
        assert!(!sep(
            &g,
            &["X1^0"],
            &["X2^0"],
            &["X1", "X2"],
            SeparationMode::Sigma
        ));
    }

    #[test]
    fn disconnected_nodes_always_separated() {
        let mut g = Dmg::new();
        g.add_node(NodeId::endogenous("A")).unwrap();
        g.add_node(NodeId::endogenous("B")).unwrap();
        g.add_node(NodeId::endogenous("C")).unwrap();
        for c in [vec![], vec!["C"]] {
            assert!(sep(&g, &["A"], &["B"], &c, SeparationMode::Sigma));
            assert!(sep(&g, &["A"], &["B"], &c, SeparationMode::D));
        }
    }

    #[test]
    fn chain_fork_collider_basics() {
        // chain A -> M -> B
        let mut g = Dmg::new();
        let a = g.add_node(NodeId::endogenous("A")).unwrap();
        let m = g.add_node(NodeId::endogenous("M")).unwrap();
        let b = g.add_node(NodeId::endogenous("B")).unwrap();
        g.add_directed(a, m, Dependence::Predictable).unwrap();
        g.add_directed(m, b, Dependence::Predictable).unwrap();
        assert!(!sep(&g, &["A"], &["B"], &[], SeparationMode::Sigma));
        assert!(sep(&g, &["A"], &["B"], &["M"], SeparationMode::Sigma));

        // collider A -> M <- B
        let mut g = Dmg::new();
        let a = g.add_node(NodeId::endogenous("A")).unwrap();
        let m = g.add_node(NodeId::endogenous("M")).unwrap();
        let b = g.add_node(NodeId::endogenous("B")).unwrap();
        g.add_directed(a, m, Dependence::Predictable).unwrap();
        g.add_directed(b, m, Dependence::Predictable).unwrap();
        assert!(sep(&g, &["A"], &["B"], &[], SeparationMode::Sigma));
        assert!(!sep(&g, &["A"], &["B"], &["M"], SeparationMode::Sigma));
    }

    #[test]
    fn overlapping_sets_are_connected() {
        let mut g = Dmg::new();
        g.add_node(NodeId::endogenous("A")).unwrap();
        assert!(!sep(&g, &["A"], &["A"], &["A"], SeparationMode::Sigma));
    }

    #[test]
    fn bidirected_acts_as_collider() {
        // A <-> M <-> B : M is a collider on the walk.
        let mut g = Dmg::new();
        let a = g.add_node(NodeId::endogenous("A")).unwrap();
        let m = g.add_node(NodeId::endogenous("M")).unwrap();
        let b = g.add_node(NodeId::endogenous("B")).unwrap();
        g.add_bidirected(a, m, Dependence::Predictable).unwrap();
        g.add_bidirected(m, b, Dependence::Predictable).unwrap();
        assert!(sep(&g, &["A"], &["B"], &[], SeparationMode::Sigma));
        assert!(!sep(&g, &["A"], &["B"], &["M"], SeparationMode::Sigma));
    }

    #[test]
    fn unknown_node_is_an_error() {
        let g = fixtures::cyclic4_dmg();
        assert!(matches!(
            g.separated_by_name(&["nope"], &["X1"], &[], SeparationMode::Sigma),
            Err(GraphError::UnknownNode(_))
        ));
    }
}
