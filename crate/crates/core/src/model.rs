//! Parameter vectors and per-client model state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Flat model weights. The length is a positive power of two and every entry is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ParameterVector<T: Scalar> {
    values: Vec<T>,
}

impl<T: Scalar> ParameterVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() || !values.len().is_power_of_two() {
            return Err(Error::BadLength(values.len()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    /// Pads `values` with zeros up to the next power of two.
    pub fn padded(mut values: Vec<T>) -> Result<Self> {
        let len = values.len().max(1).next_power_of_two();
        values.resize(len, T::zero());
        Self::new(values)
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![T::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_inner(self) -> Vec<T> {
        self.values
    }

    /// Applies `f` to the entries in place, re-checking finiteness.
    pub fn try_map_in_place(&mut self, f: impl FnOnce(&mut [T])) -> Result<()> {
        f(&mut self.values);
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn l1_distance(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).map(|(a, b)| (*a - *b).abs()).sum()
    }

    pub fn l2_norm(&self) -> T {
        self.values.iter().map(|v| *v * *v).sum::<T>().sqrt()
    }
}

impl<T: Scalar> std::ops::Index<usize> for ParameterVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

/// A client's working model plus the snapshots taken at its last two global syncs.
///
/// Until the client has synced twice, the missing snapshots are all zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelState<T: Scalar> {
    pub(crate) current: ParameterVector<T>,
    pub(crate) last_sync: ParameterVector<T>,
    pub(crate) prev_sync: ParameterVector<T>,
    pub(crate) last_sync_round: Vec<u64>,
    pub(crate) global_syncs: u64,
}

impl<T: Scalar> ModelState<T> {
    /// Fresh state: never synced, so both snapshots are zero and every index was last synced at round 0.
    pub fn new(current: ParameterVector<T>) -> Self {
        let len = current.len();
        Self {
            last_sync: ParameterVector::zeros(len).expect("len is a valid power of two"),
            prev_sync: ParameterVector::zeros(len).expect("len is a valid power of two"),
            last_sync_round: vec![0; len],
            global_syncs: 0,
            current,
        }
    }

    pub fn from_parts(
        current: ParameterVector<T>,
        last_sync: ParameterVector<T>,
        prev_sync: ParameterVector<T>,
        last_sync_round: Vec<u64>,
        global_syncs: u64,
    ) -> Result<Self> {
        let len = current.len();
        for actual in [last_sync.len(), prev_sync.len(), last_sync_round.len()] {
            if actual != len {
                return Err(Error::LengthMismatch { expected: len, actual });
            }
        }
        Ok(Self { current, last_sync, prev_sync, last_sync_round, global_syncs })
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn current(&self) -> &ParameterVector<T> {
        &self.current
    }

    pub fn last_sync(&self) -> &ParameterVector<T> {
        &self.last_sync
    }

    pub fn prev_sync(&self) -> &ParameterVector<T> {
        &self.prev_sync
    }

    pub fn last_sync_rounds(&self) -> &[u64] {
        &self.last_sync_round
    }

    pub fn global_syncs(&self) -> u64 {
        self.global_syncs
    }

    pub fn set_current(&mut self, current: ParameterVector<T>) -> Result<()> {
        if current.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: current.len() });
        }
        self.current = current;
        Ok(())
    }

    /// Staleness of each index relative to `round`.
    pub fn staleness(&self, round: u64) -> Vec<u64> {
        self.last_sync_round.iter().map(|&r| round.saturating_sub(r)).collect()
    }

    /// Overwrites the given indices with synced values and stamps them with `round`.
    ///
    /// When `global_sync` is set, the snapshots rotate: the previous `last_sync`
    /// becomes `prev_sync` and the post-download model becomes `last_sync`.
    pub fn apply_sync(&mut self, indices: &[usize], values: &[T], round: u64, global_sync: bool) -> Result<()> {
        if indices.len() != values.len() {
            return Err(Error::LengthMismatch { expected: indices.len(), actual: values.len() });
        }
        let len = self.len();
        if let Some(&index) = indices.iter().find(|&&i| i >= len) {
            return Err(Error::IndexOutOfRange { index, len });
        }
        self.current.try_map_in_place(|cur| {
            for (&i, &v) in indices.iter().zip(values) {
                cur[i] = v;
            }
        })?;
        for &i in indices {
            self.last_sync_round[i] = round;
        }
        if global_sync {
            self.prev_sync = std::mem::replace(&mut self.last_sync, self.current.clone());
            self.global_syncs += 1;
        }
        Ok(())
    }
}
