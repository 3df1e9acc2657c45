//! Euler-Maruyama simulation of validated systems and the adaptedness
//! replay check.

pub mod stats;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use thiserror::Error;

use crate::expr::{Compiled, VarRef};
use crate::model::{DriverKind, InitDist, SdeSystem};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("system is not uniquely solvable (process `{0}`)")]
    Unsolvable(String),
    #[error("numerical overflow in `{process}` at step {step} of path {path}")]
    Overflow {
        process: String,
        path: usize,
        step: usize,
    },
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("time {0} does not lie on the simulation grid")]
    OffGrid(f64),
}

/// Integration scheme. The lookahead variant deliberately consumes the next
/// driver increment and exists only to prove that the adaptedness check can
/// tell a broken scheme from a correct one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    EulerMaruyama,
    #[doc(hidden)]
    EulerMaruyamaLookahead,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SimConfig {
    pub fn new(dt: f64, n_paths: usize, seed: u64) -> Self {
        SimConfig {
            dt,
            n_paths,
            seed,
            scheme: Scheme::EulerMaruyama,
        }
    }
}

/// Simulated sample paths on a uniform grid, plus the driver increments that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble<F> {
    pub dt: F,
    pub seed: u64,
    pub n_paths: usize,
    /// Grid times 0, dt, ..., T (steps + 1 entries).
    pub grid: Vec<F>,
    process_names: Vec<String>,
    /// values[p][path * (steps + 1) + k]
    values: Vec<Vec<F>>,
    driver_names: Vec<String>,
    /// increments[d][path * steps + k]
    increments: Vec<Vec<F>>,
}

impl<F: Real> PathEnsemble<F> {
    pub fn steps(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn processes(&self) -> &[String] {
        &self.process_names
    }

    pub fn process_index(&self, name: &str) -> Result<usize, SimError> {
        self.process_names
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| SimError::UnknownProcess(name.to_string()))
    }

    pub fn value(&self, process: usize, path: usize, k: usize) -> F {
        self.values[process][path * self.grid.len() + k]
    }

    /// Grid index of a time, within floating tolerance.
    pub fn time_index(&self, t: f64) -> Result<usize, SimError> {
        let dt = self.dt.as_f64();
        let k = (t / dt).round();
        if (t - k * dt).abs() > 1e-9 * (1.0 + t.abs()) || k < 0.0 || k as usize >= self.grid.len()
        {
            return Err(SimError::OffGrid(t));
        }
        Ok(k as usize)
    }

    /// One sample per path of `process` at grid index `k`.
    pub fn column(&self, process: usize, k: usize) -> Vec<F> {
        (0..self.n_paths)
            .map(|path| self.value(process, path, k))
            .collect()
    }

    pub fn driver_increment(&self, driver: usize, path: usize, k: usize) -> F {
        self.increments[driver][path * self.steps() + k]
    }

    pub fn drivers(&self) -> &[String] {
        &self.driver_names
    }

    /// CSV export with header `time,process,path,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,process,path,value\n");
        for (p, name) in self.process_names.iter().enumerate() {
            for path in 0..self.n_paths {
                for (k, t) in self.grid.iter().enumerate() {
                    out.push_str(&format!("{t},{name},{path},{}\n", self.value(p, path, k)));
                }
            }
        }
        out
    }
}

enum IntegratorRef {
    Driver(usize),
    Endogenous(usize),
}

struct CompiledProcess {
    name: String,
    init: InitDist,
    terms: Vec<(IntegratorRef, Compiled)>,
}

struct CompiledSystem {
    processes: Vec<CompiledProcess>,
    drivers: Vec<DriverKind>,
    driver_names: Vec<String>,
    /// Endogenous process indices in topological component order.
    order: Vec<usize>,
    horizon: f64,
}

fn compile(sys: &SdeSystem) -> Result<CompiledSystem, SimError> {
    let report = sys.check_unique_solvability();
    if let Some((name, _)) = report.witness {
        return Err(SimError::Unsolvable(name));
    }

    let proc_index: BTreeMap<&str, usize> = sys
        .processes
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();
    let driver_index: BTreeMap<&str, usize> = sys
        .drivers
        .iter()
        .enumerate()
        .map(|(i, d)| (d.name.as_str(), i))
        .collect();

    // State layout for expressions: endogenous values then driver values.
    let n_endo = sys.processes.len();
    let resolve = |name: &str| -> Option<VarRef> {
        if name == "t" {
            return Some(VarRef::Time);
        }
        if let Some(&i) = proc_index.get(name) {
            return Some(VarRef::Process(i));
        }
        driver_index
            .get(name)
            .map(|&i| VarRef::Process(n_endo + i))
    };

    let mut processes = Vec::new();
    for p in &sys.processes {
        let mut terms = Vec::new();
        for (b, expr) in p.beta.iter().zip(&p.integrands) {
            let reference = if let Some(&d) = driver_index.get(b.as_str()) {
                IntegratorRef::Driver(d)
            } else {
                IntegratorRef::Endogenous(proc_index[b.as_str()])
            };
            let compiled = expr
                .compile(&resolve)
                .ok_or_else(|| SimError::InvalidConfig(format!("unresolved name in `{}`", p.name)))?;
            terms.push((reference, compiled));
        }
        processes.push(CompiledProcess {
            name: p.name.clone(),
            init: p.init.clone(),
            terms,
        });
    }

    // Topological order of endogenous processes from the component order of
    // the dependency graph.
    let g = sys.graph_of_sdes();
    let mut order = Vec::new();
    for comp in g.scc_partition() {
        for v in comp {
            let name = g.node(v).name();
            if let Some(&i) = proc_index.get(name.as_str()) {
                order.push(i);
            }
        }
    }

    Ok(CompiledSystem {
        processes,
        drivers: sys.drivers.iter().map(|d| d.kind).collect(),
        driver_names: sys.drivers.iter().map(|d| d.name.clone()).collect(),
        order,
        horizon: sys.horizon,
    })
}

fn check_grid(cfg: &SimConfig, horizon: f64) -> Result<usize, SimError> {
    if cfg.dt <= 0.0 {
        return Err(SimError::InvalidConfig("dt must be positive".into()));
    }
    if cfg.n_paths == 0 {
        return Err(SimError::InvalidConfig("need at least one path".into()));
    }
    let steps = (horizon / cfg.dt).round();
    if (horizon - steps * cfg.dt).abs() > 1e-9 * horizon.max(1.0) || steps < 1.0 {
        return Err(SimError::InvalidConfig(format!(
            "horizon {horizon} is not an integral number of steps of {}",
            cfg.dt
        )));
    }
    Ok(steps as usize)
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64 + 1);
    rng
}

/// Initial values (process order), then increments[driver][step].
fn draw_path_randomness(
    sys: &CompiledSystem,
    rng: &mut ChaCha8Rng,
    dt: f64,
    steps: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let inits: Vec<f64> = sys
        .processes
        .iter()
        .map(|p| match p.init {
            InitDist::Constant(v) => v,
            InitDist::Normal { mean, var } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + var.sqrt() * z
            }
        })
        .collect();
    let sqrt_dt = dt.sqrt();
    let mut incs = Vec::with_capacity(sys.drivers.len());
    for kind in &sys.drivers {
        let mut line = Vec::with_capacity(steps);
        match kind {
            DriverKind::Brownian => {
                for _ in 0..steps {
                    let z: f64 = rng.sample(StandardNormal);
                    line.push(sqrt_dt * z);
                }
            }
            DriverKind::Poisson(rate) => {
                let pois = Poisson::new(rate * dt).expect("positive rate");
                for _ in 0..steps {
                    line.push(pois.sample(rng));
                }
            }
            DriverKind::Time => line.resize(steps, dt),
            DriverKind::Constant(_) => line.resize(steps, 0.0),
        }
        incs.push(line);
    }
    (inits, incs)
}

/// Integrate one path. `state` holds endogenous values then driver values.
fn integrate_path<F: Real>(
    sys: &CompiledSystem,
    scheme: Scheme,
    dt: f64,
    steps: usize,
    inits: &[f64],
    incs: &[Vec<f64>],
    path: usize,
    out_values: &mut [Vec<F>],
    stride: usize,
) -> Result<(), SimError> {
    let n_endo = sys.processes.len();
    let n_drv = sys.drivers.len();
    let mut state: Vec<F> = Vec::with_capacity(n_endo + n_drv);
    for &v in inits {
        state.push(F::from_f64_lossy(v));
    }
    for kind in &sys.drivers {
        let start = match kind {
            DriverKind::Constant(c) => *c,
            _ => 0.0,
        };
        state.push(F::from_f64_lossy(start));
    }
    for (p, column) in out_values.iter_mut().enumerate() {
        column[path * stride] = state[p];
    }

    let mut dx = vec![F::zero(); n_endo];
    for k in 0..steps {
        let t = F::from_f64_lossy(k as f64 * dt);
        let drv_k = match scheme {
            Scheme::EulerMaruyama => k,
            Scheme::EulerMaruyamaLookahead => (k + 1).min(steps - 1),
        };
        for &p in &sys.order {
            let proc = &sys.processes[p];
            let mut delta = F::zero();
            for (reference, g) in &proc.terms {
                let dh = match reference {
                    IntegratorRef::Driver(d) => F::from_f64_lossy(incs[*d][drv_k]),
                    IntegratorRef::Endogenous(u) => dx[*u],
                };
                delta = delta + g.eval(&state, t) * dh;
            }
            dx[p] = delta;
        }
        for p in 0..n_endo {
            state[p] = state[p] + dx[p];
            if !state[p].is_finite() {
                return Err(SimError::Overflow {
                    process: sys.processes[p].name.clone(),
                    path,
                    step: k,
                });
            }
        }
        for d in 0..n_drv {
            state[n_endo + d] = state[n_endo + d] + F::from_f64_lossy(incs[d][k]);
        }
        for (p, column) in out_values.iter_mut().enumerate() {
            column[path * stride + k + 1] = state[p];
        }
    }
    Ok(())
}

/// Simulate the system: explicit scheme stepping every strongly connected
/// component in topological order, integrands evaluated at the left grid
/// point, endogenous integrator increments taken over the same step.
pub fn simulate<F: Real>(sys: &SdeSystem, cfg: &SimConfig) -> Result<PathEnsemble<F>, SimError> {
    let compiled = compile(sys)?;
    let steps = check_grid(cfg, compiled.horizon)?;
    let stride = steps + 1;
    let n_endo = compiled.processes.len();

    let mut values: Vec<Vec<F>> = vec![vec![F::zero(); cfg.n_paths * stride]; n_endo];
    let mut increments: Vec<Vec<F>> =
        vec![vec![F::zero(); cfg.n_paths * steps]; compiled.drivers.len()];

    for path in 0..cfg.n_paths {
        let mut rng = path_rng(cfg.seed, path);
        let (inits, incs) = draw_path_randomness(&compiled, &mut rng, cfg.dt, steps);
        for (d, line) in incs.iter().enumerate() {
            for (k, &v) in line.iter().enumerate() {
                increments[d][path * steps + k] = F::from_f64_lossy(v);
            }
        }
        integrate_path(
            &compiled, cfg.scheme, cfg.dt, steps, &inits, &incs, path, &mut values, stride,
        )?;
    }

    Ok(PathEnsemble {
        dt: F::from_f64_lossy(cfg.dt),
        seed: cfg.seed,
        n_paths: cfg.n_paths,
        grid: (0..=steps)
            .map(|k| F::from_f64_lossy(k as f64 * cfg.dt))
            .collect(),
        process_names: compiled.processes.iter().map(|p| p.name.clone()).collect(),
        values,
        driver_names: compiled.driver_names.clone(),
        increments,
    })
}

/// Replay check for adaptedness: simulate twice with identical randomness,
/// the second run with every driver increment strictly after `t_cut`
/// replaced, and require the endogenous paths to agree bit-exactly on grid
/// points up to `t_cut`.
pub fn check_adaptedness(
    sys: &SdeSystem,
    cfg: &SimConfig,
    t_cut: f64,
) -> Result<bool, SimError> {
    let compiled = compile(sys)?;
    let steps = check_grid(cfg, compiled.horizon)?;
    let stride = steps + 1;
    let k_cut = {
        let k = (t_cut / cfg.dt).round();
        if (t_cut - k * cfg.dt).abs() > 1e-9 * (1.0 + t_cut.abs()) || k < 0.0 {
            return Err(SimError::OffGrid(t_cut));
        }
        let k = k as usize;
        if k > steps {
            return Err(SimError::OffGrid(t_cut));
        }
        k
    };
    let n_endo = compiled.processes.len();

    let mut a: Vec<Vec<f64>> = vec![vec![0.0; stride]; n_endo];
    let mut b: Vec<Vec<f64>> = vec![vec![0.0; stride]; n_endo];

    for path in 0..cfg.n_paths {
        let mut rng = path_rng(cfg.seed, path);
        let (inits, incs) = draw_path_randomness(&compiled, &mut rng, cfg.dt, steps);

        // Tail replacement drawn from an unrelated stream.
        let mut alt_rng = path_rng(cfg.seed ^ 0x9e37_79b9_7f4a_7c15, path);
        let (_, alt_incs) = draw_path_randomness(&compiled, &mut alt_rng, cfg.dt, steps);
        let mut mutated = incs.clone();
        for (d, line) in mutated.iter_mut().enumerate() {
            for k in k_cut..steps {
                line[k] = alt_incs[d][k];
            }
        }

        integrate_path::<f64>(
            &compiled, cfg.scheme, cfg.dt, steps, &inits, &incs, 0, &mut a, stride,
        )?;
        integrate_path::<f64>(
            &compiled, cfg.scheme, cfg.dt, steps, &inits, &mutated, 0, &mut b, stride,
        )?;
        for p in 0..n_endo {
            for k in 0..=k_cut {
                if a[p][k].to_bits() != b[p][k].to_bits() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use crate::verify::fixtures;

    #[test]
    fn zero_integrand_keeps_paths_constant() {
        let text = "system {
            exogenous W: brownian;
            process X { init = constant(3); alpha = {X}; beta = {W}; g = [0]; }
            horizon 1;
        }";
        let sys = parse_model(text).unwrap().system;
        let ens: PathEnsemble<f64> = simulate(&sys, &SimConfig::new(0.25, 3, 1)).unwrap();
        for path in 0..3 {
            for k in 0..=4 {
                assert_eq!(ens.value(0, path, k), 3.0);
            }
        }
    }

    #[test]
    fn identical_configs_are_bit_identical() {
        let sys = parse_model(fixtures::CYCLIC4_MODEL).unwrap().system;
        let cfg = SimConfig::new(0.01, 5, 42);
        let a: PathEnsemble<f64> = simulate(&sys, &cfg).unwrap();
        let b: PathEnsemble<f64> = simulate(&sys, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adaptedness_holds_and_lookahead_fails() {
        let sys = parse_model(fixtures::CYCLIC4_MODEL).unwrap().system;
        let mut cfg = SimConfig::new(0.01, 3, 7);
        assert!(check_adaptedness(&sys, &cfg, 0.5).unwrap());
        assert!(check_adaptedness(&sys, &cfg, 0.0).unwrap());
        cfg.scheme = Scheme::EulerMaruyamaLookahead;
        assert!(!check_adaptedness(&sys, &cfg, 0.5).unwrap());
    }

    #[test]
    fn invalid_grid_is_rejected() {
        let sys = parse_model(fixtures::CYCLIC4_MODEL).unwrap().system;
        let cfg = SimConfig::new(0.3, 1, 0);
        assert!(matches!(
            simulate::<f64>(&sys, &cfg),
            Err(SimError::InvalidConfig(_))
        ));
    }

    #[test]
    fn unsolvable_system_is_rejected() {
        let sys = parse_model(fixtures::CYCLIC4_BETA_MUTATION).unwrap().system;
        assert!(matches!(
            simulate::<f64>(&sys, &SimConfig::new(0.1, 1, 0)),
            Err(SimError::Unsolvable(_))
        ));
    }
}
