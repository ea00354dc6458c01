//! Networked Lanchester combat dynamics.
//!
//! Two forces, Blue and Red, hold resource on the nodes of their own
//! *manoeuvre* networks and exchange directed fire across a shared bipartite
//! *engagement* network. Resource diffuses along manoeuvre links towards the
//! nodes that face the strongest opposition, while fire drains the engaged
//! nodes. This crate provides the vector field, a fixed-step RK4 integrator,
//! a stochastic hill-climber over one side's networks, the structural
//! statistics used to read optimized networks, the case-study and sweep
//! drivers, and a two-group mean-field reduction that serves as an analytic
//! cross-check.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the companion `lanchester` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dynamics;
pub mod error;
pub mod graph;
pub mod integrator;
pub mod meanfield;
pub mod metrics;
pub mod model;
pub mod optimizer;
pub mod scenarios;

pub use dynamics::{manoeuvre_weight, rhs, smoothed_step, total_force, Derivative, ForceTotals, Network};
pub use error::ModelError;
pub use graph::{Adjacency, Engagement};
pub use integrator::{integrate, integrate_with, rk4_step, run_to_end, Termination, Trajectory};
pub use metrics::{compute_metrics, count_sacrificial, StructuralMetrics};
pub use model::{BattleConfig, ForceState, ScenarioSpec, Side, Topology};
pub use optimizer::{
    optimize, propose_move, seed_topology, utility, MoveKind, MoveSet, OptimizationRun, TraceEntry, UtilityParams,
};
