//! σ-independence models, local-independence graphs, the independent-
//! integrator check, and do-calculus rule preconditions.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::dmg::{Dependence, Dmg, EdgeKind, GraphError, NodeId, Role, SeparationMode};

#[derive(Debug, Error)]
pub enum IndependenceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph has {0} nodes; enumeration is limited to {1}")]
    TooLarge(usize, usize),
    #[error("sets must be pairwise disjoint: `{0}` appears twice")]
    Overlap(String),
    #[error("local-independence guarantee unavailable: {0}")]
    NoGuarantee(String),
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("inconsistent model: `{0}` recorded as both separated and dependent")]
    Inconsistent(String),
}

const ENUM_NODE_LIMIT: usize = 10;

/// Split a comma-separated name list, ignoring commas nested inside piece
/// delimiters, so `X1^(0,1],X2^{0.4}` yields two names.
pub fn split_names(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | '[' | '{' => {
                depth += 1;
                cur.push(ch);
            }
            ')' | ']' | '}' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth <= 0 => {
                if !cur.trim().is_empty() {
                    out.push(cur.trim().to_string());
                }
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// A set of conditional (in)dependence judgements over a node universe.
/// Statements are stored for ordered pairs `a < b`; queries symmetrise.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceModel {
    universe: Vec<String>,
    statements: BTreeMap<(String, String, Vec<String>), bool>,
}

impl IndependenceModel {
    pub fn new(universe: Vec<String>) -> Self {
        IndependenceModel {
            universe,
            statements: BTreeMap::new(),
        }
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn insert(&mut self, a: &str, b: &str, c: &[String], separated: bool) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let mut c: Vec<String> = c.to_vec();
        c.sort();
        self.statements
            .insert((a.to_string(), b.to_string(), c), separated);
    }

    pub fn lookup(&self, a: &str, b: &str, c: &[String]) -> Option<bool> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let mut c: Vec<String> = c.to_vec();
        c.sort();
        self.statements
            .get(&(a.to_string(), b.to_string(), c))
            .copied()
    }

    pub fn statements(
        &self,
    ) -> impl Iterator<Item = (&str, &str, &[String], bool)> {
        self.statements
            .iter()
            .map(|((a, b, c), sep)| (a.as_str(), b.as_str(), c.as_slice(), *sep))
    }

    pub fn separations(&self) -> impl Iterator<Item = (&str, &str, &[String])> {
        self.statements()
            .filter(|(_, _, _, sep)| *sep)
            .map(|(a, b, c, _)| (a, b, c))
    }

    /// Sorted text form: a universe header, then one separation per line
    /// (`A _||_ B | C1,C2`); recorded dependences carry a `!` prefix.
    pub fn to_text(&self) -> String {
        let mut out = format!("nodes: {}\n", self.universe.join(","));
        for ((a, b, c), sep) in &self.statements {
            let bar = if c.is_empty() {
                String::new()
            } else {
                format!(" | {}", c.join(","))
            };
            if *sep {
                out.push_str(&format!("{a} _||_ {b}{bar}\n"));
            } else {
                out.push_str(&format!("! {a} _||_ {b}{bar}\n"));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<IndependenceModel, IndependenceError> {
        let mut universe: Vec<String> = Vec::new();
        let mut model: Option<IndependenceModel> = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("nodes:") {
                universe = split_names(rest);
                model = Some(IndependenceModel::new(universe.clone()));
                continue;
            }
            let model = model.as_mut().ok_or_else(|| {
                IndependenceError::Parse(ln + 1, "missing `nodes:` header".into())
            })?;
            let (separated, body) = match line.strip_prefix('!') {
                Some(rest) => (false, rest.trim()),
                None => (true, line),
            };
            let (a, rest) = body.split_once("_||_").ok_or_else(|| {
                IndependenceError::Parse(ln + 1, format!("expected `A _||_ B`, got `{body}`"))
            })?;
            let (b, cond) = match rest.split_once('|') {
                Some((p, c)) => (p.trim(), Some(c.trim())),
                None => (rest.trim(), None),
            };
            let a = a.trim().to_string();
            let b = b.to_string();
            let c: Vec<String> = cond.map(split_names).unwrap_or_default();
            for n in [&a, &b].into_iter().chain(c.iter()) {
                if !universe.contains(n) {
                    return Err(IndependenceError::Parse(
                        ln + 1,
                        format!("node `{n}` not in the universe"),
                    ));
                }
            }
            if let Some(prev) = model.lookup(&a, &b, &c) {
                if prev != separated {
                    return Err(IndependenceError::Inconsistent(format!(
                        "{a} _||_ {b} | {}",
                        c.join(",")
                    )));
                }
            }
            model.insert(&a, &b, &c, separated);
        }
        model.ok_or_else(|| IndependenceError::Parse(0, "empty model".into()))
    }
}

/// All σ-separation statements over singleton pairs of `g`'s nodes with
/// conditioning sets up to `max_set_size`, in deterministic order. Guarded
/// against graphs beyond the default size limit of 10 nodes.
pub fn enumerate_im(g: &Dmg, max_set_size: usize) -> Result<IndependenceModel, IndependenceError> {
    enumerate_im_over(g, max_set_size, None, ENUM_NODE_LIMIT)
}

/// As [`enumerate_im`], restricted to a node subset when given and with an
/// explicit size guard.
pub fn enumerate_im_over(
    g: &Dmg,
    max_set_size: usize,
    subset: Option<&[String]>,
    node_limit: usize,
) -> Result<IndependenceModel, IndependenceError> {
    let names: Vec<String> = match subset {
        Some(s) => s.to_vec(),
        None => {
            let mut v: Vec<String> = g.nodes().map(|(_, n)| n.name()).collect();
            v.sort();
            v
        }
    };
    if names.len() > node_limit {
        return Err(IndependenceError::TooLarge(names.len(), node_limit));
    }
    let mut model = IndependenceModel::new(names.clone());
    for (i, a) in names.iter().enumerate() {
        for b in names.iter().skip(i + 1) {
            let rest: Vec<&String> = names.iter().filter(|n| *n != a && *n != b).collect();
            for c in subsets_up_to(&rest, max_set_size) {
                let c_refs: Vec<&str> = c.iter().map(|s| s.as_str()).collect();
                let sep = g.separated_by_name(&[a], &[b], &c_refs, SeparationMode::Sigma)?;
                let c_owned: Vec<String> = c.iter().map(|s| s.to_string()).collect();
                model.insert(a, b, &c_owned, sep);
            }
        }
    }
    Ok(model)
}

/// Subsets of `items` with size at most `k`, smallest first, in index order
/// within a size.
pub fn subsets_up_to<'a, T: ?Sized>(items: &[&'a T], k: usize) -> Vec<Vec<&'a T>> {
    let n = items.len();
    assert!(n < 26, "subset enumeration limited to small sets");
    let mut out: Vec<Vec<&T>> = Vec::new();
    for size in 0..=k.min(n) {
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != size {
                continue;
            }
            out.push(
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| items[i])
                    .collect(),
            );
        }
    }
    out
}

/// Report of the independent-integrator check: every integrator must be an
/// exogenous variable and no two processes may share one. Deterministic
/// integrators (`time`, `constant`) induce no common noise and are exempt
/// from the disjointness requirement.
#[derive(Debug, Clone)]
pub struct IntegratorReport {
    pub pass: bool,
    pub endogenous_integrators: Vec<(String, String)>,
    pub shared_integrators: Vec<(String, String, String)>,
}

/// Integrators are read off the augmented graph as sources of adapted edges
/// into endogenous processes.
pub fn check_independent_integrators(aug: &Dmg) -> IntegratorReport {
    let mut endogenous_integrators = Vec::new();
    let mut users: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for e in aug.edges() {
        if e.kind != EdgeKind::Directed || e.dependence != Dependence::Adapted {
            continue;
        }
        let src = aug.node(e.src);
        let dst = aug.node(e.dst);
        if dst.role != Role::Endogenous {
            continue;
        }
        match src.role {
            Role::Endogenous => {
                endogenous_integrators.push((dst.name(), src.name()));
            }
            Role::Exogenous => {
                if !src.deterministic {
                    users.entry(src.name()).or_default().push(dst.name());
                }
            }
            Role::Intervention => {}
        }
    }
    let mut shared_integrators = Vec::new();
    for (driver, mut procs) in users {
        procs.sort();
        procs.dedup();
        if procs.len() >= 2 {
            for pair in procs.windows(2) {
                shared_integrators.push((driver.clone(), pair[0].clone(), pair[1].clone()));
            }
        }
    }
    IntegratorReport {
        pass: endogenous_integrators.is_empty() && shared_integrators.is_empty(),
        endogenous_integrators,
        shared_integrators,
    }
}

/// The collapsed graph together with a flag saying whether its missing
/// directed edges certify local independences.
#[derive(Debug, Clone)]
pub struct LocalIndependenceGraph {
    pub graph: Dmg,
    pub guarantee: bool,
    pub report: IntegratorReport,
}

pub fn local_independence_graph(aug: &Dmg) -> LocalIndependenceGraph {
    let report = check_independent_integrators(aug);
    LocalIndependenceGraph {
        graph: aug.to_dmg(),
        guarantee: report.pass,
        report,
    }
}

/// σ-separation query whose positive answers certify local independence
/// (`X_A` does not influence `X_B` given `X_C` locally in time). Requires
/// the independent-integrator guarantee.
pub fn sigma_li_query(
    lig: &LocalIndependenceGraph,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<bool, IndependenceError> {
    if !lig.guarantee {
        let mut reasons = Vec::new();
        for (p, u) in &lig.report.endogenous_integrators {
            reasons.push(format!("`{p}` integrates endogenous `{u}`"));
        }
        for (w, p, q) in &lig.report.shared_integrators {
            reasons.push(format!("`{w}` drives both `{p}` and `{q}`"));
        }
        return Err(IndependenceError::NoGuarantee(reasons.join("; ")));
    }
    Ok(lig
        .graph
        .separated_by_name(a, b, c, SeparationMode::Sigma)?)
}

/// Build the surgical graph for a do-calculus precondition and evaluate it.
///
/// Intervention nodes `I_x` are attached to each member of `x` as their only
/// edge; all edges into `w` are removed. The three rules then ask for
/// σ-separation of:
///   1. `y` from `x` given `z ∪ w`,
///   2. `y` from `I_x` given `x ∪ z ∪ w`,
///   3. `y` from `I_x` given `z ∪ w`.
pub fn docalc_check(
    g: &Dmg,
    rule: u8,
    x: &[&str],
    y: &[&str],
    z: &[&str],
    w: &[&str],
) -> Result<bool, IndependenceError> {
    assert!(matches!(rule, 1..=3), "rule must be 1, 2 or 3");
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for n in x.iter().chain(y).chain(z).chain(w) {
        if !seen.insert(n) {
            return Err(IndependenceError::Overlap(n.to_string()));
        }
    }
    for set in [x, y, z, w] {
        for n in set {
            let idx = g.require(n)?;
            if g.node(idx).role != Role::Endogenous {
                return Err(IndependenceError::Graph(GraphError::InvalidNodeSet(
                    format!("`{n}` is not endogenous"),
                )));
            }
        }
    }

    let targets = g.resolve_set(w)?;
    let mut cut = g.intervene(&targets)?;
    let mut ix_names: Vec<String> = Vec::new();
    for name in x {
        let ix = cut.add_node(NodeId::intervention(format!("I_{name}")))?;
        let tgt = cut.require(name)?;
        cut.add_directed(ix, tgt, Dependence::Predictable)?;
        ix_names.push(format!("I_{name}"));
    }
    cut.validate()?;

    let ix_refs: Vec<&str> = ix_names.iter().map(|s| s.as_str()).collect();
    let mut zw: Vec<&str> = z.to_vec();
    zw.extend_from_slice(w);
    let result = match rule {
        1 => cut.separated_by_name(y, x, &zw, SeparationMode::Sigma)?,
        2 => {
            let mut xzw: Vec<&str> = x.to_vec();
            xzw.extend_from_slice(&zw);
            cut.separated_by_name(y, &ix_refs, &xzw, SeparationMode::Sigma)?
        }
        _ => cut.separated_by_name(y, &ix_refs, &zw, SeparationMode::Sigma)?,
    };
    Ok(result)
}
