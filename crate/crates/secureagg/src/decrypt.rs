use ofl_thfhe::HeBackend;
use rand::RngCore;

use crate::audit::{AuditLog, DecryptionEvent, ScalarKind};
use crate::error::{Error, Result};

/// Per-round state for threshold decryptions.
pub struct Decryptor<'a> {
    pub round: u64,
    /// Whether each key-share holder returns its partial decryption this round.
    pub responding: &'a [bool],
    pub audit: &'a mut AuditLog,
    pub rng: &'a mut dyn RngCore,
}

impl Decryptor<'_> {
    pub fn missing(&self) -> Vec<usize> {
        self.responding.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i).collect()
    }
}

/// ServerDec at the server, PartDec at every share holder, FinDec at the server.
///
/// Any silent holder aborts with [`Error::Dropout`] before FinDec. Successful
/// reveals are recorded in the audit log.
pub fn threshold_decrypt<B: HeBackend>(
    b: &B,
    ct: &B::Ct,
    kind: ScalarKind,
    leader: Option<usize>,
    d: &mut Decryptor,
) -> Result<Vec<f64>> {
    let parties = b.party_count();
    if d.responding.len() != parties {
        return Err(Error::LengthMismatch { left: d.responding.len(), right: parties });
    }
    let dec = b.server_dec(ct, d.rng)?;
    let missing = d.missing();
    if !missing.is_empty() {
        return Err(Error::Dropout { missing });
    }
    let shares = (0..parties).map(|i| b.part_dec(i, &dec, d.rng)).collect::<std::result::Result<Vec<_>, _>>()?;
    let out = b.fin_dec(&dec, &shares)?;
    d.audit.record(DecryptionEvent { round: d.round, session: b.session(&dec), kind, leader })?;
    Ok(out)
}
