//! Simulation parameters. Every key except `N` has a default.

use std::path::PathBuf;

use ofl_core::trainer::{param_count, SyntheticSpec};
use ofl_core::DeviceType;
use serde::{Deserialize, Serialize};

use crate::attack::AttackSpec;
use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Clustered opportunistic syncing with encrypted inter-cluster aggregation.
    Ofl,
    /// Full-sync federated averaging baseline.
    Fedavg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Real,
}

/// Relative weight of each clustering feature after max-min normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureWeights {
    pub compute: f64,
    pub bandwidth: f64,
    pub availability: f64,
    pub model: f64,
}

impl Default for FeatureWeights {
    fn default() -> Self {
        Self { compute: 1.0, bandwidth: 1.0, availability: 0.5, model: 0.25 }
    }
}

/// Weights of residual compute and bandwidth in the leader capability score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapabilityWeights {
    pub compute: f64,
    pub bandwidth: f64,
}

impl Default for CapabilityWeights {
    fn default() -> Self {
        Self { compute: 0.5, bandwidth: 0.5 }
    }
}

mod defaults {
    use super::*;

    pub fn t_max() -> u64 {
        100
    }
    pub fn t_rc() -> u64 {
        10
    }
    pub fn t_lt() -> usize {
        5
    }
    pub fn protocol() -> Protocol {
        Protocol::Ofl
    }
    pub fn backend() -> BackendKind {
        BackendKind::Mock
    }
    pub fn seed() -> u64 {
        1
    }
    pub fn epsilon_select() -> f64 {
        5.0
    }
    pub fn epsilon_perturb() -> f64 {
        5.0
    }
    pub fn k_dp() -> usize {
        4
    }
    pub fn gamma_cap() -> f64 {
        0.1
    }
    pub fn privacy_per_round() -> f64 {
        1000.0
    }
    pub fn learning_rate() -> f64 {
        0.1
    }
    pub fn batch_size() -> usize {
        32
    }
    pub fn round_seconds() -> f64 {
        10.0
    }
    pub fn leader_drain() -> f64 {
        0.3
    }
    pub fn recharge() -> f64 {
        0.05
    }
    pub fn kmeans_restarts() -> usize {
        4
    }
    pub fn op_seconds() -> f64 {
        1e-3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(rename = "N")]
    pub clients: usize,
    #[serde(rename = "T_max", default = "defaults::t_max")]
    pub t_max: u64,
    /// Re-clustering interval in rounds.
    #[serde(rename = "T_rc", default = "defaults::t_rc")]
    pub t_rc: u64,
    /// Local iterations per sync window.
    #[serde(rename = "T_lt", default = "defaults::t_lt")]
    pub t_lt: usize,
    /// Cluster count; `⌈log₂N⌉` when absent.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default = "defaults::protocol")]
    pub protocol: Protocol,
    #[serde(default = "defaults::backend")]
    pub backend: BackendKind,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    /// Seed of the synthetic datasets; derived from `seed` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_seed: Option<u64>,
    /// ε₁, spent per selected parameter.
    #[serde(default = "defaults::epsilon_select")]
    pub epsilon_select: f64,
    /// ε₂, spent per perturbed parameter.
    #[serde(default = "defaults::epsilon_perturb")]
    pub epsilon_perturb: f64,
    /// Density clusters used to calibrate the Laplace noise.
    #[serde(default = "defaults::k_dp")]
    pub k_dp: usize,
    #[serde(default = "defaults::gamma_cap")]
    pub gamma_up_cap: f64,
    #[serde(default = "defaults::gamma_cap")]
    pub gamma_down_cap: f64,
    /// Per-round privacy limit handed to the rate planner.
    #[serde(default = "defaults::privacy_per_round")]
    pub privacy_per_round: f64,
    #[serde(default = "defaults::learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "defaults::batch_size")]
    pub batch_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<f64>,
    /// One device class per client; round-robin over A..D when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_types: Option<Vec<DeviceType>>,
    /// Overrides every client's availability probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub availability: Option<f64>,
    /// Simulated seconds of budget per round.
    #[serde(default = "defaults::round_seconds")]
    pub round_seconds: f64,
    /// Battery fraction a leadership stint consumes.
    #[serde(default = "defaults::leader_drain")]
    pub leader_drain: f64,
    /// Battery fraction recovered per round without leadership.
    #[serde(default = "defaults::recharge")]
    pub recharge: f64,
    #[serde(default)]
    pub capability: CapabilityWeights,
    #[serde(default)]
    pub features: FeatureWeights,
    #[serde(default = "defaults::kmeans_restarts")]
    pub kmeans_restarts: usize,
    /// Probability that a leader withholds its partial decryption in a round.
    #[serde(default)]
    pub dropout_probability: f64,
    /// Simulated server seconds per homomorphic operation.
    #[serde(default = "defaults::op_seconds")]
    pub op_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackSpec>,
    #[serde(default)]
    pub task: SyntheticSpec,
    /// Where to append the decryption audit log, if anywhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_log: Option<PathBuf>,
}

impl SimulationConfig {
    /// Defaults for `clients` clients.
    pub fn new(clients: usize) -> Self {
        serde_json::from_value(serde_json::json!({ "N": clients })).expect("defaults deserialize")
    }

    pub fn cluster_count(&self) -> usize {
        self.k.unwrap_or_else(|| (self.clients.max(1) as f64).log2().ceil().max(1.0) as usize)
    }

    pub fn device_types(&self) -> Vec<DeviceType> {
        match &self.device_types {
            Some(t) => t.clone(),
            None => {
                let cycle = [DeviceType::A, DeviceType::B, DeviceType::C, DeviceType::D];
                (0..self.clients).map(|i| cycle[i % 4]).collect()
            }
        }
    }

    pub fn task_seed(&self) -> u64 {
        self.task_seed.unwrap_or_else(|| ofl_core::rng::derive_seed(self.seed, "task"))
    }

    pub fn model_len(&self) -> usize {
        param_count(self.task.kind, self.task.feature_dim, self.task.class_count)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(config(key, "must be positive"))
            }
        };
        let unit = |key: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(config(key, "must lie in [0, 1]"))
            }
        };
        if self.clients == 0 {
            return Err(config("N", "needs at least one client"));
        }
        if self.t_max == 0 {
            return Err(config("T_max", "needs at least one round"));
        }
        if self.t_rc == 0 || self.t_rc > self.t_max {
            return Err(config("T_rc", "must lie in [1, T_max]"));
        }
        if self.t_lt == 0 {
            return Err(config("T_lt", "needs at least one local iteration"));
        }
        let k = self.cluster_count();
        if k == 0 || k > self.clients {
            return Err(config("K", format!("must lie in [1, N], got {k}")));
        }
        positive("epsilon_select", self.epsilon_select)?;
        positive("epsilon_perturb", self.epsilon_perturb)?;
        positive("privacy_per_round", self.privacy_per_round)?;
        positive("learning_rate", self.learning_rate)?;
        positive("round_seconds", self.round_seconds)?;
        if self.k_dp == 0 {
            return Err(config("k_dp", "needs at least one density cluster"));
        }
        if self.batch_size == 0 {
            return Err(config("batch_size", "must be positive"));
        }
        if let Some(c) = self.clip {
            positive("clip", c)?;
        }
        for (key, v) in [("gamma_up_cap", self.gamma_up_cap), ("gamma_down_cap", self.gamma_down_cap)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(config(key, "must lie in (0, 1]"));
            }
        }
        unit("leader_drain", self.leader_drain)?;
        unit("recharge", self.recharge)?;
        unit("dropout_probability", self.dropout_probability)?;
        if self.op_seconds < 0.0 || !self.op_seconds.is_finite() {
            return Err(config("op_seconds", "must be non-negative"));
        }
        if let Some(a) = self.availability {
            unit("availability", a)?;
        }
        if let Some(t) = &self.device_types {
            if t.len() != self.clients {
                return Err(config("device_types", format!("needs {} entries, got {}", self.clients, t.len())));
            }
        }
        if self.kmeans_restarts == 0 {
            return Err(config("kmeans_restarts", "must be positive"));
        }
        self.task.validate().map_err(|e| config("task", e.to_string()))?;
        let len = self.model_len();
        if !len.is_power_of_two() {
            return Err(config("task", format!("model length {len} must be a power of two")));
        }
        if let Some(a) = &self.attack {
            a.validate(self.clients)?;
        }
        crate::devices::profiles(self)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_cluster_rule() {
        let c = SimulationConfig::new(16);
        assert_eq!(c.cluster_count(), 4);
        assert_eq!(SimulationConfig::new(1).cluster_count(), 1);
        assert_eq!(SimulationConfig::new(5).cluster_count(), 3);
        assert_eq!(c.model_len(), 64);
        c.validate().unwrap();
    }

    #[test]
    fn violations_name_the_key() {
        let mut c = SimulationConfig::new(4);
        c.t_rc = 500;
        assert!(c.validate().unwrap_err().to_string().contains("T_rc"));
        let mut c = SimulationConfig::new(4);
        c.k = Some(9);
        assert!(c.validate().unwrap_err().to_string().contains("`K`"));
        let mut c = SimulationConfig::new(4);
        c.epsilon_perturb = 0.0;
        assert!(c.validate().unwrap_err().to_string().contains("epsilon_perturb"));
    }

    #[test]
    fn n_is_required_and_unknown_keys_rejected() {
        let err = serde_json::from_str::<SimulationConfig>(r#"{"T_max": 3}"#).unwrap_err();
        assert!(err.to_string().contains("`N`"));
        assert!(serde_json::from_str::<SimulationConfig>(r#"{"N": 3, "bogus": 1}"#).is_err());
    }
}
