//! The model DSL: systems of stochastic differential equations as declared
//! text, their validation, and the graphs they induce.

mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::dmg::{Dependence, Dmg, GraphError, NodeId};
use crate::expr::Expr;

pub use parse::{parse_model, Diagnostic, Severity};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("intervention target `{0}` is not endogenous")]
    NotEndogenous(String),
    #[error("system is not uniquely solvable: {0} has integrators {1:?} inside its own strongly connected component")]
    NotSolvable(String, Vec<String>),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitDist {
    Constant(f64),
    Normal { mean: f64, var: f64 },
}

impl InitDist {
    /// Degenerate laws induce no randomness and hence no graph node.
    pub fn is_deterministic(&self) -> bool {
        match self {
            InitDist::Constant(_) => true,
            InitDist::Normal { var, .. } => *var == 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriverKind {
    Brownian,
    Poisson(f64),
    Time,
    Constant(f64),
}

impl DriverKind {
    pub fn is_deterministic(&self) -> bool {
        matches!(self, DriverKind::Time | DriverKind::Constant(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriverSpec {
    pub name: String,
    pub kind: DriverKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub name: String,
    pub init: InitDist,
    /// Integrand arguments (predictable dependence).
    pub alpha: Vec<String>,
    /// Integrator arguments (adapted dependence); one integrand expression
    /// per entry, in order.
    pub beta: Vec<String>,
    pub integrands: Vec<Expr>,
    pub markov: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdeSystem {
    pub processes: Vec<ProcessSpec>,
    pub drivers: Vec<DriverSpec>,
    /// Named times usable as split points (`label s = 0.4;`).
    pub labels: Vec<(String, f64)>,
    pub horizon: f64,
}

/// Display name of the initial-value node of a process.
pub fn init_node_name(process: &str) -> String {
    format!("{process}^0")
}

impl SdeSystem {
    pub fn process(&self, name: &str) -> Option<&ProcessSpec> {
        self.processes.iter().find(|p| p.name == name)
    }

    pub fn driver(&self, name: &str) -> Option<&DriverSpec> {
        self.drivers.iter().find(|d| d.name == name)
    }

    pub fn is_endogenous(&self, name: &str) -> bool {
        self.process(name).is_some()
    }

    pub fn label_value(&self, name: &str) -> Option<f64> {
        self.labels
            .iter()
            .find(|(l, _)| l == name)
            .map(|(_, v)| *v)
    }

    /// The dependency graph of the system: endogenous and exogenous process
    /// nodes plus initial-value nodes for non-degenerate initial laws.
    /// α-parents contribute predictable edges, β-parents adapted ones; a
    /// parent in both gets a single adapted edge.
    pub fn graph_of_sdes(&self) -> Dmg {
        let mut g = Dmg::new();
        let mut idx: BTreeMap<&str, usize> = BTreeMap::new();
        for p in &self.processes {
            idx.insert(&p.name, g.add_node(NodeId::endogenous(&p.name)).unwrap());
        }
        for d in &self.drivers {
            let mut node = NodeId::exogenous(&d.name);
            if d.kind.is_deterministic() {
                node = node.deterministic();
            }
            idx.insert(&d.name, g.add_node(node).unwrap());
        }
        for p in &self.processes {
            let v = idx[p.name.as_str()];
            for b in &p.beta {
                if b != &p.name {
                    g.add_directed(idx[b.as_str()], v, Dependence::Adapted).unwrap();
                }
            }
            for a in &p.alpha {
                if a != &p.name && !p.beta.contains(a) {
                    g.add_directed(idx[a.as_str()], v, Dependence::Predictable)
                        .unwrap();
                }
            }
            if !p.init.is_deterministic() {
                let init = g
                    .add_node(NodeId::exogenous(init_node_name(&p.name)))
                    .unwrap();
                g.add_directed(init, v, Dependence::Predictable).unwrap();
            }
        }
        g
    }

    /// Unique solvability: no process may have an integrator inside its own
    /// strongly connected component. On success the report carries the
    /// topologically ordered component list used by the constructive
    /// existence argument.
    pub fn check_unique_solvability(&self) -> SolvabilityReport {
        let g = self.graph_of_sdes();
        let ids = g.scc_ids();
        let comps = g.scc_partition();
        let scc_order: Vec<Vec<String>> = comps
            .iter()
            .map(|c| c.iter().map(|&i| g.node(i).name()).collect())
            .collect();
        for p in &self.processes {
            let v = g.index_of(&p.name).unwrap();
            let bad: Vec<String> = p
                .beta
                .iter()
                .filter(|b| {
                    g.index_of(b)
                        .map(|bi| ids[bi] == ids[v])
                        .unwrap_or(false)
                })
                .cloned()
                .collect();
            if !bad.is_empty() {
                return SolvabilityReport {
                    solvable: false,
                    witness: Some((p.name.clone(), bad)),
                    scc_order,
                };
            }
        }
        SolvabilityReport {
            solvable: true,
            witness: None,
            scc_order,
        }
    }

    /// The collapsed graph of the induced model: exogenous variables
    /// (drivers and initial values) are projected out, shared stochastic
    /// parents leaving bidirected edges behind. The induced model is simple,
    /// which the result records.
    pub fn induced_dscm_graph(&self) -> Result<InducedGraph, ModelError> {
        let report = self.check_unique_solvability();
        if let Some((v, beta)) = report.witness {
            return Err(ModelError::NotSolvable(v, beta));
        }
        let mut dmg = self.graph_of_sdes().to_dmg();
        dmg.add_note("induced model is simple");
        Ok(InducedGraph { graph: dmg, simple: true })
    }

    /// Perfect intervention at the system level: targeted processes become
    /// constant paths with no arguments. Commutes with graph induction.
    pub fn intervene(&self, targets: &[(&str, f64)]) -> Result<SdeSystem, ModelError> {
        for (name, _) in targets {
            if !self.is_endogenous(name) {
                return Err(ModelError::NotEndogenous(name.to_string()));
            }
        }
        let mut out = self.clone();
        for p in &mut out.processes {
            if let Some((_, value)) = targets.iter().find(|(n, _)| *n == p.name) {
                p.init = InitDist::Constant(*value);
                p.alpha = Vec::new();
                p.beta = Vec::new();
                p.integrands = Vec::new();
            }
        }
        Ok(out)
    }

    /// Names of all exogenous-side parents feeding each process through its
    /// integrators (adapted edges), used by the independence layer.
    pub fn integrator_map(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.processes
            .iter()
            .map(|p| (p.name.clone(), p.beta.iter().cloned().collect()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SolvabilityReport {
    pub solvable: bool,
    /// First violating process and the offending integrators.
    pub witness: Option<(String, Vec<String>)>,
    pub scc_order: Vec<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct InducedGraph {
    pub graph: Dmg,
    pub simple: bool,
}
