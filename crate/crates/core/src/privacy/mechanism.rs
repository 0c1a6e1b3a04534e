use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Floor applied to a zero sensitivity before it divides the budget.
pub const MIN_SENSITIVITY: f64 = 1e-12;

/// Max-min normalised utilities and their sensitivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UtilityScores<T: Scalar> {
    pub scores: Vec<T>,
    pub sensitivity: T,
}

impl<T: Scalar> UtilityScores<T> {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Sensitivity as used inside the mechanism, never below [`MIN_SENSITIVITY`].
    pub fn mechanism_sensitivity(&self) -> T {
        self.sensitivity.max(T::lit(MIN_SENSITIVITY))
    }
}

/// Max-min normalisation. All-equal input maps to 0.5 everywhere with zero sensitivity.
pub fn normalize_utilities<T: Scalar>(ofactors: &[T]) -> Result<UtilityScores<T>> {
    if ofactors.is_empty() {
        return Err(invalid("ofactors", "needs at least one entry"));
    }
    let (min, max) = ofactors.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = max - min;
    if !(spread > T::zero()) {
        return Ok(UtilityScores { scores: vec![T::lit(0.5); ofactors.len()], sensitivity: T::zero() });
    }
    Ok(UtilityScores { scores: ofactors.iter().map(|&x| (x - min) / spread).collect(), sensitivity: T::one() })
}

/// Sequential exponential mechanism without replacement.
///
/// Each draw picks among the remaining indices with probability proportional to
/// `exp(ε₁·u_i / 2Δ_u)`; Δ_u stays fixed for the whole round. Returns sorted indices.
pub fn select_parameters<T: Scalar, R: Rng + ?Sized>(
    u: &UtilityScores<T>,
    count: usize,
    eps1: T,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if count > u.len() {
        return Err(invalid("count", "exceeds the number of parameters"));
    }
    if !(eps1 >= T::zero()) {
        return Err(invalid("eps1", "must be non-negative"));
    }
    let factor = eps1.as_f64() / (2.0 * u.mechanism_sensitivity().as_f64());
    let umax = u.scores.iter().fold(f64::NEG_INFINITY, |m, s| m.max(s.as_f64()));
    // Subtracting the max keeps every weight in (0, 1].
    let mut pool: Vec<(usize, f64)> =
        u.scores.iter().enumerate().map(|(i, s)| (i, (factor * (s.as_f64() - umax)).exp())).collect();

    let mut picked = Vec::with_capacity(count);
    for _ in 0..count {
        let total: f64 = pool.iter().map(|p| p.1).sum();
        let mut target = rng.random::<f64>() * total;
        let mut slot = pool.len() - 1;
        for (k, &(_, w)) in pool.iter().enumerate() {
            if target < w {
                slot = k;
                break;
            }
            target -= w;
        }
        picked.push(pool.remove(slot).0);
    }
    picked.sort_unstable();
    Ok(picked)
}
