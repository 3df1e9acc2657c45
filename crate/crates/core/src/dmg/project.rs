//! Latent projection: marginalise a set of nodes out of a DMG at the graph
//! level. The result is an over-approximation of the true marginal graph
//! (the marginal graph is a subgraph of the latent projection).

use std::collections::{BTreeMap, BTreeSet};

use super::{Dependence, Dmg, EdgeKind, GraphError, NodeIdx, Role};

impl Dmg {
    /// Project out `drop`, keeping everything else.
    ///
    /// Kept nodes `u`, `v` receive a directed edge `u -> v` when a directed
    /// walk `u -> l1 -> ... -> lk -> v` (possibly direct, `k = 0`) runs
    /// through dropped nodes, and a bidirected edge when a walk through
    /// dropped non-colliders puts arrowheads at both endpoints. Parallel
    /// witnesses merge into one edge per kind; the edge is adapted when some
    /// witnessing walk consists of adapted edges only.
    pub fn latent_project(&self, drop: &BTreeSet<NodeIdx>) -> Result<Dmg, GraphError> {
        self.project_impl(drop, true)
    }

    /// Marginalise nodes that are deterministic functions of their parents:
    /// only directed dependence composes, no confounding arises. This is the
    /// right notion for evaluation pieces of a split model graph, whose noise
    /// sources stay behind as explicit exogenous nodes.
    pub fn substitute_project(&self, drop: &BTreeSet<NodeIdx>) -> Result<Dmg, GraphError> {
        self.project_impl(drop, false)
    }

    fn project_impl(
        &self,
        drop: &BTreeSet<NodeIdx>,
        emit_bidirected: bool,
    ) -> Result<Dmg, GraphError> {
        for &d in drop {
            self.check_idx(d)?;
            if self.node(d).role == Role::Intervention {
                return Err(GraphError::InvalidNodeSet(format!(
                    "cannot marginalise intervention node `{}`",
                    self.node(d).name()
                )));
            }
        }

        let mut out = Dmg::new();
        let mut map: BTreeMap<NodeIdx, NodeIdx> = BTreeMap::new();
        for (i, n) in self.nodes() {
            if drop.contains(&i) {
                continue;
            }
            let idx = out.add_node(n.clone()).expect("unique in source");
            map.insert(i, idx);
        }

        for (&u, &u_out) in &map {
            // Directed reach through dropped nodes, tracking whether an
            // all-adapted witness exists: state (node, all_adapted).
            let mut hits: BTreeMap<NodeIdx, bool> = BTreeMap::new();
            let mut seen = vec![[false; 2]; self.node_count()];
            let mut stack: Vec<(NodeIdx, bool)> = Vec::new();
            for e in self.edges() {
                if e.kind != EdgeKind::Directed || e.src != u {
                    continue;
                }
                let ad = e.dependence == Dependence::Adapted;
                if drop.contains(&e.dst) {
                    if !seen[e.dst][ad as usize] {
                        seen[e.dst][ad as usize] = true;
                        stack.push((e.dst, ad));
                    }
                } else {
                    let entry = hits.entry(e.dst).or_insert(false);
                    *entry = *entry || ad;
                }
            }
            while let Some((v, all_adapted)) = stack.pop() {
                for e in self.edges() {
                    if e.kind != EdgeKind::Directed || e.src != v {
                        continue;
                    }
                    let ad = all_adapted && e.dependence == Dependence::Adapted;
                    if drop.contains(&e.dst) {
                        if !seen[e.dst][ad as usize] {
                            seen[e.dst][ad as usize] = true;
                            stack.push((e.dst, ad));
                        }
                    } else if e.dst != u {
                        let entry = hits.entry(e.dst).or_insert(false);
                        *entry = *entry || ad;
                    }
                }
            }
            for (v, adapted) in hits {
                out.add_directed(u_out, map[&v], dep_of(adapted))?;
            }

            if !emit_bidirected {
                continue;
            }

            // Bidirected projection: walks leaving u against an arrowhead.
            // Arrival::Tail means the walk may still climb towards ancestors
            // of u inside the drop set; Arrival::Head means only forward
            // directed edges remain (anything else would create a collider).
            let mut bi_hits: BTreeMap<NodeIdx, bool> = BTreeMap::new();
            let mut seen = vec![[[false; 2]; 2]; self.node_count()];
            let mut stack: Vec<(NodeIdx, Arrival, bool)> = Vec::new();
            for e in self.edges() {
                let start = match e.kind {
                    EdgeKind::Directed if e.dst == u && drop.contains(&e.src) => {
                        Some((e.src, Arrival::Tail))
                    }
                    EdgeKind::Bidirected if e.src == u => Some((e.dst, Arrival::Head)),
                    EdgeKind::Bidirected if e.dst == u => Some((e.src, Arrival::Head)),
                    _ => None,
                };
                let Some((n, arr)) = start else { continue };
                let ad = e.dependence == Dependence::Adapted;
                if drop.contains(&n) {
                    if !seen[n][arr as usize][ad as usize] {
                        seen[n][arr as usize][ad as usize] = true;
                        stack.push((n, arr, ad));
                    }
                } else if arr == Arrival::Head && n != u {
                    // Direct bidirected edge between kept nodes.
                    let entry = bi_hits.entry(n).or_insert(false);
                    *entry = *entry || ad;
                }
            }
            while let Some((v, arrival, all_adapted)) = stack.pop() {
                for e in self.edges() {
                    let step = match (arrival, e.kind) {
                        // Climb further: an edge v' -> v traversed upward.
                        (Arrival::Tail, EdgeKind::Directed) if e.dst == v => {
                            Some((e.src, Arrival::Tail))
                        }
                        // Turn downward over a directed edge v -> x.
                        (Arrival::Tail, EdgeKind::Directed) if e.src == v => {
                            Some((e.dst, Arrival::Head))
                        }
                        // Turn downward over the single allowed bidirected edge.
                        (Arrival::Tail, EdgeKind::Bidirected) if e.src == v => {
                            Some((e.dst, Arrival::Head))
                        }
                        (Arrival::Tail, EdgeKind::Bidirected) if e.dst == v => {
                            Some((e.src, Arrival::Head))
                        }
                        // Downward phase: forward directed edges only.
                        (Arrival::Head, EdgeKind::Directed) if e.src == v => {
                            Some((e.dst, Arrival::Head))
                        }
                        _ => None,
                    };
                    let Some((next, arr)) = step else { continue };
                    let ad = all_adapted && e.dependence == Dependence::Adapted;
                    if drop.contains(&next) {
                        if !seen[next][arr as usize][ad as usize] {
                            seen[next][arr as usize][ad as usize] = true;
                            stack.push((next, arr, ad));
                        }
                    } else if arr == Arrival::Head && next != u {
                        let entry = bi_hits.entry(next).or_insert(false);
                        *entry = *entry || ad;
                    }
                }
            }
            for (v, adapted) in bi_hits {
                out.add_bidirected(u_out, map[&v], dep_of(adapted))?;
            }
        }

        if !drop.is_empty() {
            out.add_note("latent projection: over-approximation of the marginal graph");
        }
        Ok(out)
    }

    pub fn latent_project_by_name(&self, drop: &[&str]) -> Result<Dmg, GraphError> {
        let set = self.resolve_set(drop)?;
        self.latent_project(&set)
    }
}

fn dep_of(adapted: bool) -> Dependence {
    if adapted {
        Dependence::Adapted
    } else {
        Dependence::Predictable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Arrival {
    Tail = 0,
    Head = 1,
}
