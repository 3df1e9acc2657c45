//! Causal semantics for systems of stochastic differential equations:
//! dependency graphs with adapted/predictable edges, σ- and d-separation on
//! cyclic mixed graphs, time-splitting / subsampling / collapsing /
//! marginalisation / intervention, local-independence certificates,
//! constraint-based discovery, and a seeded jump-diffusion simulator that
//! verifies the graphical claims statistically.
//!
//! ```
//! use dscm_core::{parse_model, SeparationMode};
//!
//! let model = "
//! system {
//!   exogenous W: brownian;
//!   process X { init = normal(0, 1); alpha = {X}; beta = {W}; g = [1]; }
//!   process Y { init = normal(0, 1); alpha = {X, Y}; beta = {W}; g = [Y]; }
//!   horizon 1;
//! }";
//! let sys = parse_model(model).unwrap().system;
//! assert!(sys.check_unique_solvability().solvable);
//!
//! // Projecting the exogenous variables out turns the shared Brownian
//! // integrator into latent confounding.
//! let dmg = sys.graph_of_sdes().to_dmg();
//! assert!(dmg.has_bidirected("X", "Y"));
//! assert!(!dmg
//!     .separated_by_name(&["X"], &["Y"], &[], SeparationMode::Sigma)
//!     .unwrap());
//! ```

pub mod discovery;
pub mod dmg;
pub mod expr;
pub mod independence;
pub mod model;
pub mod partition;
pub mod scalar;
pub mod sim;
pub mod timeops;
pub mod verify;

/// Default scalar type of the numerical layer.
pub type Scalar = f64;

/// Ensemble of sample paths at the default precision.
pub type Ensemble = sim::PathEnsemble<Scalar>;

pub use dmg::{Dependence, Dmg, EdgeKind, NodeId, Role, SeparationMode};
pub use model::{parse_model, SdeSystem};
pub use partition::{EvalPartition, Piece, TimeVal};
