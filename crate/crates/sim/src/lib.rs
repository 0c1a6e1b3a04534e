//! Deterministic discrete-event simulation of opportunistic federated learning.
//!
//! A run re-clusters clients every `T_rc` rounds on their reported resources,
//! elects one leader per cluster, lets available members train and upload
//! sparse private updates to their leader in simulated arrival order, and
//! combines leader models under threshold encryption with spectral poisoning
//! scores. The same data, initial models and availability draws drive the
//! full-sync FedAvg baseline.

pub mod attack;
pub mod baseline;
pub mod cluster;
pub mod config;
pub mod devices;
pub mod engine;
pub mod error;
pub mod leader;
pub mod metrics;

pub use attack::{AttackMode, AttackSpec};
pub use baseline::{centralized, run_fedavg};
pub use cluster::{recluster, ClusterAssignment};
pub use config::{BackendKind, Protocol, SimulationConfig};
pub use engine::{run, run_with, RunResult};
pub use error::{Error, Result};
pub use leader::elect_leader;
pub use metrics::RoundMetrics;
