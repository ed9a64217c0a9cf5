//! Discrete-time simulation of dynamic task allocation in robot swarms.
//!
//! Followers move on a finite lattice in synchronized rounds while tasks
//! appear at random vertices. Four follower policies are provided: a Lévy
//! random walk, task propagation through vertex-resident propagators,
//! a fixed division of labour between the two, and a hybrid that switches
//! between them over time.

pub mod arrivals;
pub mod config;
pub mod grid;
pub mod metrics;
pub mod policy;
pub mod propagation;
pub mod rng;
pub mod world;

pub use arrivals::{ArrivalParams, Task, TaskId};
pub use config::{Algorithm, ConfigError, ExperimentConfig};
pub use grid::{Direction, Lattice, Position};
pub use metrics::{MetricsAccumulator, MetricsSummary};
pub use policy::{Behavior, FollowerAgent, PolicyKind, SubPolicy};
pub use world::{run_trial, RoundReport, TrialResult, WorldState};
