use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the threshold scheme.
///
/// Moduli are powers of a power-of-two prime stand-in `p = 2^p_bits`:
/// `q_l = p^l`, `q_L = p·q_dec`. Messages are encoded at scale `p^scale_levels`
/// and plaintext constants at scale `p`, so every CMult is followed by a
/// rescale by `p` that consumes one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThFheParams {
    pub ring_degree: usize,
    pub p_bits: u32,
    pub levels: u32,
    pub scale_levels: u32,
    /// Hamming weight of the ternary secret.
    pub hamming_weight: usize,
    pub sigma: f64,
    /// Density of the ZO(ρ) encryption mask.
    pub rho: f64,
    pub sigma_flood: f64,
    /// Noise of each partial decryption share.
    pub eta: f64,
    /// Randomized-rounding widths for the two ServerDec components, in units of `p`.
    pub sigma1: f64,
    pub sigma2: f64,
    /// Digit width of the rotation-key gadget decomposition.
    pub gadget_bits: u32,
    /// When false, encryption adds no Gaussian error terms.
    pub fresh_noise: bool,
}

impl Default for ThFheParams {
    fn default() -> Self {
        Self::desk()
    }
}

impl ThFheParams {
    /// Laptop-scale preset: N = 1024, p = 2^25, L = 10, encoding scale 2^50.
    pub fn desk() -> Self {
        Self {
            ring_degree: 1024,
            p_bits: 25,
            levels: 10,
            scale_levels: 2,
            hamming_weight: 64,
            sigma: 3.2,
            rho: 0.5,
            sigma_flood: 2f64.powi(20),
            eta: 3.2,
            sigma1: 1.0,
            sigma2: 1.0,
            gadget_bits: 16,
            fresh_noise: true,
        }
    }

    /// Desk preset with flooding, fresh encryption noise and share noise disabled.
    pub fn test_mode() -> Self {
        Self { sigma_flood: 0.0, eta: 0.0, fresh_noise: false, ..Self::desk() }
    }

    /// Ring degree 2^14 as in production-size parameter sets. Slow.
    pub fn full_scale() -> Self {
        Self { ring_degree: 1 << 14, ..Self::desk() }
    }

    pub fn slots(&self) -> usize {
        self.ring_degree / 2
    }

    pub fn modulus_bits(&self, level: u32) -> u32 {
        self.p_bits * level
    }

    /// Bits of `q_dec = q_L / p`.
    pub fn dec_bits(&self) -> u32 {
        self.modulus_bits(self.levels - 1)
    }

    pub fn scale(&self) -> f64 {
        2f64.powi((self.p_bits * self.scale_levels) as i32)
    }

    pub fn p(&self) -> f64 {
        2f64.powi(self.p_bits as i32)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.ring_degree < 4 || !self.ring_degree.is_power_of_two() {
            bad.push("ring_degree must be a power of two ≥ 4".to_string());
        }
        if self.p_bits < 8 || self.p_bits > 62 {
            bad.push("p_bits must lie in [8, 62]".to_string());
        }
        if self.levels < 3 {
            bad.push("levels must be at least 3".to_string());
        }
        // Rescaling adds 2^(p_bits−1) before shifting, so keep headroom below 2^256.
        if self.p_bits * self.levels > 250 {
            bad.push(format!("q_L = 2^{} exceeds 2^250", self.p_bits * self.levels));
        }
        if self.scale_levels == 0 || self.scale_levels >= self.levels {
            bad.push("scale_levels must lie in [1, levels)".to_string());
        }
        if self.p_bits < 20 {
            bad.push("q_L / q_dec = p must be at least 2^20".to_string());
        }
        if self.hamming_weight == 0 || self.hamming_weight > self.ring_degree {
            bad.push("hamming_weight must lie in [1, ring_degree]".to_string());
        }
        for (name, v) in [
            ("sigma", self.sigma),
            ("sigma_flood", self.sigma_flood),
            ("eta", self.eta),
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                bad.push(format!("{name} must be finite and non-negative"));
            }
        }
        if !(0.0..=1.0).contains(&self.rho) {
            bad.push("rho must lie in [0, 1]".to_string());
        }
        if self.gadget_bits == 0 || self.gadget_bits > 32 {
            bad.push("gadget_bits must lie in [1, 32]".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(bad.join("; ")))
        }
    }
}
