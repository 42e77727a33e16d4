//! Redundant robot-to-goal assignment under travel-time uncertainty.
//!
//! Robots report noisy positions on a road network. Each goal must be
//! covered by a robot, and a few extra robots may be sent to the same
//! goals so that the first arrival comes sooner in expectation.

pub mod bench;
pub mod dispatch;
pub mod graph;
pub mod hungarian;
pub mod instance;
pub mod matroid;
pub mod objective;
pub mod seed;
pub mod solvers;
pub mod uncertainty;

pub use bench::{run_series, ExperimentConfig, ResultsTable};
pub use dispatch::{replay, summarize, DispatchConfig, DispatchStats, Policy, RequestTrace, Summary};
pub use graph::{NodeId, Point, TransportGraph, TravelTimeTable};
pub use instance::{build_instance, initial_assignment, Assignment, AssignmentInstance, Edge, InstanceFile};
pub use matroid::IndependenceContext;
pub use objective::{exact_cost, ObjectiveCache};
pub use solvers::{greedy, exhaustive_optimal, verify_bound, Method, SolverReport};
pub use uncertainty::{node_belief, NoiseKind, NoiseSpec, PositionBelief};
