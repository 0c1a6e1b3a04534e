//! Model poisoning by compromised leaders.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum AttackMode {
    /// Adds a tone at a quarter of the sampling rate, random phase.
    SinusoidInjection,
    /// Scales the leader's update by `lambda`.
    Scale { lambda: f64 },
    /// Negates the leader's update.
    SignFlip,
}

/// When an attacker leads a cluster, it poisons the leader model before encrypting it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub attackers: Vec<usize>,
    pub mode: AttackMode,
    /// First round in which attackers act.
    #[serde(default)]
    pub onset: u64,
    /// Tone amplitude as a multiple of the RMS of the leader's clean update.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_amplitude() -> f64 {
    5.0
}

impl AttackSpec {
    pub fn validate(&self, clients: usize) -> Result<()> {
        if let Some(&a) = self.attackers.iter().find(|&&a| a >= clients) {
            return Err(config("attack", format!("attacker {a} is not a client id")));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(config("attack", "amplitude must be non-negative"));
        }
        if let AttackMode::Scale { lambda } = self.mode {
            if !lambda.is_finite() {
                return Err(config("attack", "lambda must be finite"));
            }
        }
        Ok(())
    }

    pub fn active(&self, client: usize, round: u64) -> bool {
        round >= self.onset && self.attackers.contains(&client)
    }

    /// Poisons `model` in place given the global model it started from.
    pub fn apply<R: Rng + ?Sized>(&self, model: &mut [f64], global: &[f64], rng: &mut R) {
        match self.mode {
            AttackMode::SinusoidInjection => {
                let n = model.len();
                let rms = (model.iter().zip(global).map(|(m, g)| (m - g).powi(2)).sum::<f64>() / n as f64).sqrt();
                let amp = self.amplitude * rms;
                let phase: f64 = rng.random_range(0.0..2.0 * PI);
                for (j, v) in model.iter_mut().enumerate() {
                    *v += amp * (2.0 * PI * (n / 4 * j) as f64 / n as f64 + phase).sin();
                }
            }
            AttackMode::Scale { lambda } => {
                for (v, g) in model.iter_mut().zip(global) {
                    *v = g + lambda * (*v - g);
                }
            }
            AttackMode::SignFlip => {
                for (v, g) in model.iter_mut().zip(global) {
                    *v = g - (*v - g);
                }
            }
        }
    }
}

/// RMS of a tone injected into an `n`-vector at `amplitude` (for tests and reports).
pub fn tone_rms(amplitude: f64) -> f64 {
    amplitude / 2f64.sqrt()
}
