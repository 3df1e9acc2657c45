//! Independent reference implementations used to cross-check the main
//! algorithms. These deliberately avoid the production code paths: strongly
//! connected components come from all-pairs reachability, separation from a
//! literal walk enumeration over (edge, direction) states, and simulator
//! moments from closed forms.

use std::collections::BTreeSet;

use crate::dmg::{Dmg, EdgeKind, NodeIdx, SeparationMode};

/// Component ids from the definition: `u` and `v` share a component exactly
/// when each reaches the other along directed edges.
pub fn scc_by_mutual_reachability(g: &Dmg) -> Vec<usize> {
    let n = g.node_count();
    let mut reach = vec![vec![false; n]; n];
    for v in 0..n {
        let mut stack = vec![v];
        reach[v][v] = true;
        while let Some(x) = stack.pop() {
            for e in g.edges() {
                if e.kind == EdgeKind::Directed && e.src == x && !reach[v][e.dst] {
                    reach[v][e.dst] = true;
                    stack.push(e.dst);
                }
            }
        }
    }
    let mut ids = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if ids[v] != usize::MAX {
            continue;
        }
        for u in v..n {
            if reach[v][u] && reach[u][v] {
                ids[u] = next;
            }
        }
        next += 1;
    }
    ids
}

fn ancestors_fixpoint(g: &Dmg, seed: &BTreeSet<NodeIdx>) -> BTreeSet<NodeIdx> {
    let mut set = seed.clone();
    loop {
        let mut grew = false;
        for e in g.edges() {
            if e.kind == EdgeKind::Directed && set.contains(&e.dst) && set.insert(e.src) {
                grew = true;
            }
        }
        if !grew {
            return set;
        }
    }
}

/// Walk-enumeration separation oracle.
///
/// Walks are grown one edge at a time over (edge, direction) arrival states;
/// a state is re-queued at most once, which is exhaustive because whether an
/// extension of a walk stays open depends only on its last edge and node.
/// The blocking predicate below is a direct transcription of the definition:
/// a collider must be an ancestor of the conditioning set, a non-collider in
/// the conditioning set blocks when (σ) it has a child on the walk outside
/// its component or (d) always.
pub fn separated_by_walk_enumeration(
    g: &Dmg,
    a: &BTreeSet<NodeIdx>,
    b: &BTreeSet<NodeIdx>,
    c: &BTreeSet<NodeIdx>,
    mode: SeparationMode,
) -> bool {
    if a.iter().any(|x| b.contains(x)) {
        return false; // the trivial walk is never blocked
    }
    let anc_c = ancestors_fixpoint(g, c);
    let scc = scc_by_mutual_reachability(g);
    let edges: Vec<_> = g.edges().copied().collect();

    // Arrival state: traversed `edges[e]` in direction `dir` (0: src->dst,
    // 1: dst->src), standing at the far endpoint.
    let arrive_node = |e: usize, dir: usize| -> NodeIdx {
        if dir == 0 {
            edges[e].dst
        } else {
            edges[e].src
        }
    };
    // Mark of the traversed edge at its arrival node.
    let arrive_head = |e: usize, dir: usize| -> bool {
        match edges[e].kind {
            EdgeKind::Bidirected => true,
            EdgeKind::Directed => dir == 0, // arrowhead sits at dst
        }
    };

    // Traversal direction 0 walks src -> dst, direction 1 walks dst -> src;
    // both apply to either edge kind.
    let mut open: Vec<[bool; 2]> = vec![[false; 2]; edges.len()];
    let mut queue: Vec<(usize, usize)> = Vec::new();
    for &x in a {
        for (i, e) in edges.iter().enumerate() {
            if e.src == x && !open[i][0] {
                open[i][0] = true;
                queue.push((i, 0));
            }
            if e.dst == x && !open[i][1] {
                open[i][1] = true;
                queue.push((i, 1));
            }
        }
    }

    while let Some((ein, din)) = queue.pop() {
        let v = arrive_node(ein, din);
        if b.contains(&v) {
            return false;
        }
        for (eout, e) in edges.iter().enumerate() {
            for dout in 0..2 {
                let leaves_from = if dout == 0 { e.src } else { e.dst };
                if leaves_from != v || open[eout][dout] {
                    continue;
                }
                // Interior-node blocking for the triple (ein, v, eout).
                let in_head = arrive_head(ein, din);
                let out_head = match e.kind {
                    EdgeKind::Bidirected => true,
                    EdgeKind::Directed => dout == 1, // leaving against the arrow
                };
                let passes = if in_head && out_head {
                    anc_c.contains(&v)
                } else if c.contains(&v) {
                    match mode {
                        SeparationMode::D => false,
                        SeparationMode::Sigma => {
                            let mut children_on_walk = Vec::new();
                            if !in_head {
                                // Arrived over an edge v -> prev.
                                let prev = if din == 0 {
                                    edges[ein].src
                                } else {
                                    edges[ein].dst
                                };
                                children_on_walk.push(prev);
                            }
                            if !out_head {
                                let next = if dout == 0 { e.dst } else { e.src };
                                children_on_walk.push(next);
                            }
                            !children_on_walk.iter().any(|&ch| scc[ch] != scc[v])
                        }
                    }
                } else {
                    true
                };
                if passes {
                    open[eout][dout] = true;
                    queue.push((eout, dout));
                }
            }
        }
    }
    true
}

/// Closed-form moments of the mean-reverting diffusion
/// `dX = theta (mu - X) dt + sigma dW`, started at `x0`.
pub fn ou_moments(theta: f64, mu: f64, sigma: f64, x0: f64, t: f64) -> (f64, f64) {
    let mean = mu + (x0 - mu) * (-theta * t).exp();
    let var = sigma * sigma / (2.0 * theta) * (1.0 - (-2.0 * theta * t).exp());
    (mean, var)
}

/// Poisson probability mass function.
pub fn poisson_pmf(lambda: f64, k: usize) -> f64 {
    let mut log_p = -lambda + (k as f64) * lambda.ln();
    for i in 1..=k {
        log_p -= (i as f64).ln();
    }
    log_p.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::fixtures;

    #[test]
    fn oracle_reproduces_demo_separations() {
        let g = fixtures::cyclic4_augmented();
        let a = [g.require("X1^0").unwrap()].into_iter().collect();
        let b = [g.require("X2^0").unwrap()].into_iter().collect();
        let c = [g.require("X1").unwrap(), g.require("X2").unwrap()]
            .into_iter()
            .collect();
        assert!(separated_by_walk_enumeration(
            &g,
            &a,
            &b,
            &c,
            SeparationMode::D
        ));
        assert!(!separated_by_walk_enumeration(
            &g,
            &a,
            &b,
            &c,
            SeparationMode::Sigma
        ));
    }

    #[test]
    fn poisson_pmf_sums_to_one() {
        let total: f64 = (0..60).map(|k| poisson_pmf(2.0, k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
