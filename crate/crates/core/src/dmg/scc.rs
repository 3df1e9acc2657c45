//! Strongly connected components of the directed part, in topological order
//! of the condensation. Bidirected edges are ignored throughout.

use super::{Dmg, EdgeKind, NodeIdx};

impl Dmg {
    /// Tarjan over the directed subgraph. Components are returned in a
    /// topological order of the condensation (sources first) and each
    /// component is sorted by node index.
    pub fn scc_partition(&self) -> Vec<Vec<NodeIdx>> {
        let n = self.node_count();
        let mut succ: Vec<Vec<NodeIdx>> = vec![Vec::new(); n];
        for e in self.edges() {
            if e.kind == EdgeKind::Directed {
                succ[e.src].push(e.dst);
            }
        }

        let mut state = Tarjan {
            counter: 0,
            index: vec![None; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            comps: Vec::new(),
        };
        for v in 0..n {
            if state.index[v].is_none() {
                state.visit(v, &succ);
            }
        }
        // Tarjan emits components in reverse topological order.
        state.comps.reverse();
        for c in &mut state.comps {
            c.sort_unstable();
        }
        state.comps
    }

    /// Component id per node, numbered in topological order.
    pub fn scc_ids(&self) -> Vec<usize> {
        let comps = self.scc_partition();
        let mut id = vec![usize::MAX; self.node_count()];
        for (cid, comp) in comps.iter().enumerate() {
            for &v in comp {
                id[v] = cid;
            }
        }
        id
    }
}

struct Tarjan {
    counter: usize,
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<NodeIdx>,
    comps: Vec<Vec<NodeIdx>>,
}

impl Tarjan {
    fn visit(&mut self, root: NodeIdx, succ: &[Vec<NodeIdx>]) {
        // Explicit stack; graphs here are small but recursion depth should
        // not depend on input shape.
        enum Frame {
            Enter(NodeIdx),
            Resume(NodeIdx, usize),
        }
        let mut frames = vec![Frame::Enter(root)];
        while let Some(frame) = frames.pop() {
            match frame {
                Frame::Enter(v) => {
                    self.index[v] = Some(self.counter);
                    self.low[v] = self.counter;
                    self.counter += 1;
                    self.stack.push(v);
                    self.on_stack[v] = true;
                    frames.push(Frame::Resume(v, 0));
                }
                Frame::Resume(v, mut i) => {
                    let mut descended = false;
                    while i < succ[v].len() {
                        let w = succ[v][i];
                        i += 1;
                        match self.index[w] {
                            None => {
                                frames.push(Frame::Resume(v, i));
                                frames.push(Frame::Enter(w));
                                descended = true;
                                break;
                            }
                            Some(wi) => {
                                if self.on_stack[w] {
                                    self.low[v] = self.low[v].min(wi);
                                }
                            }
                        }
                    }
                    if descended {
                        continue;
                    }
                    if self.low[v] == self.index[v].unwrap() {
                        let mut comp = Vec::new();
                        loop {
                            let w = self.stack.pop().expect("tarjan stack");
                            self.on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        self.comps.push(comp);
                    }
                    // Propagate lowlink to the parent frame.
                    if let Some(Frame::Resume(p, _)) = frames.last() {
                        let p = *p;
                        self.low[p] = self.low[p].min(self.low[v]);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmg::{Dependence, NodeId};
    use crate::verify::fixtures;
    use crate::verify::oracle;

    #[test]
    fn demo_graph_components() {
        let g = fixtures::cyclic4_augmented();
        let comps = g.scc_partition();
        let named: Vec<Vec<String>> = comps
            .iter()
            .map(|c| c.iter().map(|&i| g.node(i).name()).collect())
            .collect();
        assert!(named.contains(&vec![
            "X1".to_string(),
            "X2".to_string(),
            "X3".to_string()
        ]));
        assert!(named.contains(&vec!["X4".to_string()]));
        // Condensation order: the cycle precedes X4.
        let pos_cycle = named.iter().position(|c| c.len() == 3).unwrap();
        let pos_x4 = named.iter().position(|c| c == &vec!["X4".to_string()]).unwrap();
        assert!(pos_cycle < pos_x4);
        // Every node in exactly one component.
        let total: usize = comps.iter().map(|c| c.len()).sum();
        assert_eq!(total, g.node_count());
    }

    #[test]
    fn edgeless_graph_gives_singletons() {
        let mut g = Dmg::new();
        for i in 0..3 {
            g.add_node(NodeId::endogenous(format!("A{i}"))).unwrap();
        }
        let comps = g.scc_partition();
        assert_eq!(comps.len(), 3);
        assert!(comps.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn random_graphs_match_reachability_closure() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut g = Dmg::new();
            for i in 0..6 {
                g.add_node(NodeId::endogenous(format!("n{i}"))).unwrap();
            }
            for _ in 0..rng.random_range(0..12) {
                let a = rng.random_range(0..6);
                let b = rng.random_range(0..6);
                if a != b {
                    g.add_directed(a, b, Dependence::Predictable).unwrap();
                }
            }
            let ids = g.scc_ids();
            let oracle_ids = oracle::scc_by_mutual_reachability(&g);
            for a in 0..6 {
                for b in 0..6 {
                    assert_eq!(
                        ids[a] == ids[b],
                        oracle_ids[a] == oracle_ids[b],
                        "scc mismatch"
                    );
                }
            }
            // Topological order of the condensation.
            for e in g.edges() {
                assert!(ids[e.src] <= ids[e.dst]);
            }
        }
    }
}
