use ofl_core::Scalar;
use ofl_thfhe::HeBackend;

use crate::audit::ScalarKind;
use crate::decrypt::{threshold_decrypt, Decryptor};
use crate::dft::{fhe_dft, DftPlan};
use crate::error::{Error, Result};
use crate::score::{s_factors, SanitizingScore};
use crate::spectrum::high_freq_magnitude;

#[derive(Debug, Clone, PartialEq)]
pub enum AggregateOutcome {
    Completed {
        model: Vec<f64>,
        session: u64,
    },
    /// Some share holders were silent; the previous global model stays in force.
    Aborted {
        missing: Vec<usize>,
    },
}

/// `Σ w_i·ct_i` by one CMult per input and a balanced Add tree.
pub fn weighted_sum<B: HeBackend>(b: &B, cts: &[B::Ct], weights: &[f64]) -> Result<B::Ct> {
    if cts.is_empty() {
        return Err(Error::NoLeaders);
    }
    if cts.len() != weights.len() {
        return Err(Error::LengthMismatch { left: cts.len(), right: weights.len() });
    }
    let mut layer =
        cts.iter().zip(weights).map(|(c, w)| b.cmult(c, &[*w])).collect::<std::result::Result<Vec<_>, _>>()?;
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        for pair in layer.chunks(2) {
            next.push(match pair {
                [a, c] => b.add(a, c)?,
                [a] => a.clone(),
                _ => unreachable!(),
            });
        }
        layer = next;
    }
    Ok(layer.pop().expect("non-empty"))
}

/// Weights every leader model by `s_i / K` (no renormalization, so the weights
/// sum to at most 1) and runs the threshold decryption of the result.
pub fn inter_aggregate<B: HeBackend, T: Scalar>(
    b: &B,
    leader_cts: &[B::Ct],
    s_factors: &[T],
    d: &mut Decryptor,
) -> Result<AggregateOutcome> {
    let k = leader_cts.len() as f64;
    let weights: Vec<f64> = s_factors.iter().map(|s| s.as_f64() / k).collect();
    let global = weighted_sum(b, leader_cts, &weights)?;
    match threshold_decrypt(b, &global, ScalarKind::GlobalModel, None, d) {
        Ok(model) => {
            let session = d.audit.events().last().map_or(0, |e| e.session);
            Ok(AggregateOutcome::Completed { model, session })
        }
        Err(Error::Dropout { missing }) => Ok(AggregateOutcome::Aborted { missing }),
        Err(e) => Err(e),
    }
}

/// Spectral magnitudes under encryption plus leader-reported distances, combined
/// into sanitizing scores.
pub fn score_leaders<B: HeBackend, T: Scalar>(
    b: &B,
    plan: &DftPlan<T>,
    leader_cts: &[B::Ct],
    distances: &[T],
    d: &mut Decryptor,
) -> Result<Vec<SanitizingScore<T>>> {
    if leader_cts.len() != distances.len() {
        return Err(Error::LengthMismatch { left: leader_cts.len(), right: distances.len() });
    }
    let mut mags = Vec::with_capacity(leader_cts.len());
    for (i, ct) in leader_cts.iter().enumerate() {
        let spectrum = fhe_dft(b, ct, None, plan)?;
        mags.push(T::lit(high_freq_magnitude(b, &spectrum, plan, i, d)?));
    }
    s_factors(&mags, distances)
}
