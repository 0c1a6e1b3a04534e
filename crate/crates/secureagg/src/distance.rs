use ofl_core::Scalar;
use ofl_thfhe::{HeBackend, Rotation};

use crate::error::{Error, Result};

/// `Σ |a_j − b_j|`, computed by a leader from its own model and the public global model.
pub fn manhattan<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (*x - *y).abs()).sum())
}

/// Encrypted Manhattan distance: difference, slotwise `|·|`, then rotate-and-add,
/// leaving the total in every slot.
///
/// Needs [`HeBackend::slot_abs`], which only the exact mock provides.
pub fn fhe_md<B: HeBackend>(b: &B, leader: &B::Ct, global: &B::Ct) -> Result<B::Ct> {
    let mut acc = b.slot_abs(&b.sub(leader, global)?)?;
    let period = b.period(&acc);
    let mut shift = 1;
    while shift < period {
        if !b.has_rotation(period, Rotation::Left(shift)) {
            return Err(Error::MissingRotation(shift));
        }
        acc = b.add(&acc, &b.rotate(&acc, Rotation::Left(shift))?)?;
        shift *= 2;
    }
    Ok(acc)
}
