//! Opportunistic differentially private uploads.
//!
//! A client scores every parameter by its o-factor (update magnitude times value
//! density, damped by staleness), turns the scores into exponential-mechanism
//! utilities, draws the upload set without replacement, then perturbs the drawn
//! values with Laplace noise calibrated per density cluster.

mod density;
mod mechanism;
mod perturb;

pub use density::{density_estimate, silverman_bandwidth};
pub use mechanism::{normalize_utilities, select_parameters, UtilityScores, MIN_SENSITIVITY};
pub use perturb::{kde_clusters, perturb_selected, sample_laplace, ParameterClusterSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::ModelState;
use crate::scalar::{fraction_count, Scalar};

/// Per-parameter opportunistic score.
///
/// `|θ' − θ₀| · dens / log₂(2 + |θ₀ − θ₁|)`. The `2 +` keeps the denominator at
/// least 1, so never-synced and unchanged parameters are well defined.
pub fn o_factor<T: Scalar>(m: &ModelState<T>, dens: &[T]) -> Result<Vec<T>> {
    if dens.len() != m.len() {
        return Err(Error::LengthMismatch { expected: m.len(), actual: dens.len() });
    }
    let two = T::lit(2.0);
    let cur = m.current().as_slice();
    let last = m.last_sync().as_slice();
    let prev = m.prev_sync().as_slice();
    Ok((0..m.len()).map(|i| (cur[i] - last[i]).abs() * dens[i] / (two + (last[i] - prev[i]).abs()).log2()).collect())
}

/// Budget split between selection (ε₁ per draw) and perturbation (ε₂ per value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PrivacyBudget<T: Scalar> {
    pub epsilon_total: T,
    pub epsilon_select: T,
    pub epsilon_perturb: T,
}

impl<T: Scalar> PrivacyBudget<T> {
    /// Total budget of one upload round: `⌈γ_up·|θ|⌉·(ε₁ + ε₂)` by sequential composition.
    pub fn for_round(epsilon_select: T, epsilon_perturb: T, gamma_up: T, model_len: usize) -> Result<Self> {
        if !(epsilon_select > T::zero()) {
            return Err(invalid("epsilon_select", "must be positive"));
        }
        if !(epsilon_perturb > T::zero()) {
            return Err(invalid("epsilon_perturb", "must be positive"));
        }
        let count = T::from_usize(fraction_count(gamma_up, model_len)).unwrap();
        Ok(Self { epsilon_total: count * epsilon_select + count * epsilon_perturb, epsilon_select, epsilon_perturb })
    }

    pub fn spent_for(&self, uploaded: usize) -> T {
        T::from_usize(uploaded).unwrap() * (self.epsilon_select + self.epsilon_perturb)
    }
}

/// Sparse perturbed update shipped from a client to its leader.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SelectedUpdate<T: Scalar> {
    pub indices: Vec<usize>,
    pub values: Vec<T>,
    pub sender: usize,
    pub round: u64,
}

impl<T: Scalar> SelectedUpdate<T> {
    /// Checks that indices are strictly increasing, in range, and paired with finite values.
    pub fn validate(&self, model_len: usize) -> Result<()> {
        if self.indices.len() != self.values.len() {
            return Err(Error::LengthMismatch { expected: self.indices.len(), actual: self.values.len() });
        }
        if let Some(&index) = self.indices.iter().find(|&&i| i >= model_len) {
            return Err(Error::IndexOutOfRange { index, len: model_len });
        }
        if self.indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("indices", "must be strictly increasing"));
        }
        if let Some(index) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(())
    }

    /// Wire size; see [`crate::codec::sparse_wire_bytes`].
    pub fn wire_bytes(&self, model_len: usize) -> usize {
        crate::codec::sparse_wire_bytes(self.indices.len(), model_len)
    }
}

/// Knobs of the upload pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UploadConfig<T: Scalar> {
    pub epsilon_select: T,
    pub epsilon_perturb: T,
    /// Number of density clusters used to calibrate the Laplace noise.
    pub k_dp: usize,
}

/// Runs the full pipeline: density, o-factor, utilities, selection, perturbation.
pub fn prepare_upload<T: Scalar, R: Rng + ?Sized>(
    m: &ModelState<T>,
    count: usize,
    cfg: &UploadConfig<T>,
    sender: usize,
    round: u64,
    rng: &mut R,
) -> Result<SelectedUpdate<T>> {
    let current = m.current().as_slice();
    let dens = density_estimate(current, silverman_bandwidth(current))?;
    let scores = normalize_utilities(&o_factor(m, &dens)?)?;
    let indices = select_parameters(&scores, count, cfg.epsilon_select, rng)?;
    let picked: Vec<T> = indices.iter().map(|&i| current[i]).collect();
    let (values, _) = perturb_selected(&picked, cfg.k_dp, cfg.epsilon_perturb, rng)?;
    Ok(SelectedUpdate { indices, values, sender, round })
}
