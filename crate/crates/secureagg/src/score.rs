use ofl_core::Scalar;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-leader sanitizing factor `s = 1 − MagNorm·DistNorm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SanitizingScore<T> {
    pub s_factor: T,
    pub magnitude: T,
    pub distance: T,
    pub mag_norm: T,
    pub dist_norm: T,
}

/// Max-min normalization; a zero spread maps everything to 0.
pub fn max_min_normalize<T: Scalar>(v: &[T]) -> Vec<T> {
    let lo = v.iter().copied().fold(T::infinity(), T::min);
    let hi = v.iter().copied().fold(T::neg_infinity(), T::max);
    let spread = hi - lo;
    v.iter().map(|x| if spread > T::zero() { (*x - lo) / spread } else { T::zero() }).collect()
}

pub fn s_factors<T: Scalar>(magnitudes: &[T], distances: &[T]) -> Result<Vec<SanitizingScore<T>>> {
    if magnitudes.len() != distances.len() {
        return Err(Error::LengthMismatch { left: magnitudes.len(), right: distances.len() });
    }
    let mags = max_min_normalize(magnitudes);
    let dists = max_min_normalize(distances);
    Ok((0..magnitudes.len())
        .map(|i| SanitizingScore {
            s_factor: T::one() - mags[i] * dists[i],
            magnitude: magnitudes[i],
            distance: distances[i],
            mag_norm: mags[i],
            dist_norm: dists[i],
        })
        .collect())
}
