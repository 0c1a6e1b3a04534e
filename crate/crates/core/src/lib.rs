//! Plaintext side of opportunistic federated learning: domain types, seeded
//! randomness, the model codec, per-round rate planning, the differentially
//! private upload pipeline, local training, and intra-cluster aggregation.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which the simulator uses.

// Negated comparisons double as NaN rejection.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod error;
pub mod intra;
pub mod model;
pub mod planner;
pub mod privacy;
pub mod resources;
pub mod rng;
pub mod scalar;
pub mod status;
pub mod trainer;

pub use error::{Error, Result};
pub use intra::{build_download, DownloadRequest, LeaderState};
pub use model::{ModelState, ParameterVector};
pub use planner::{feasibility_check, solve_rates, RatePlan};
pub use privacy::{PrivacyBudget, SelectedUpdate, UtilityScores};
pub use resources::{DeviceProfile, DeviceType, ResourceKind, ResourceProfile};
pub use rng::{seed_rng, Stream};
pub use scalar::{fraction_count, Scalar};
pub use status::{ClientStatusReport, StatusLedger};
pub use trainer::{SyntheticTask, TaskKind, TrainConfig};

pub type ParameterVectorF64 = ParameterVector<f64>;
pub type ModelStateF64 = ModelState<f64>;
pub type ResourceProfileF64 = ResourceProfile<f64>;
pub type RatePlanF64 = RatePlan<f64>;
pub type SelectedUpdateF64 = SelectedUpdate<f64>;
pub type SyntheticTaskF64 = SyntheticTask<f64>;
pub type LeaderStateF64 = LeaderState<f64>;
pub type StatusLedgerF64 = StatusLedger<f64>;

pub type ParameterVectorF32 = ParameterVector<f32>;
pub type ModelStateF32 = ModelState<f32>;
