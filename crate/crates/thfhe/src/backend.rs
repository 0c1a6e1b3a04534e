//! The interface the aggregation protocol programs against.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    Left(usize),
    Right(usize),
}

impl Rotation {
    /// Equivalent left shift within a cyclic `period`.
    pub fn left_amount(self, period: usize) -> usize {
        match self {
            Rotation::Left(r) => r % period,
            Rotation::Right(r) => (period - r % period) % period,
        }
    }
}

/// Which ciphertext space a value lives in: evaluation (`C`) or post-ServerDec (`C_dec`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Eval,
    Dec,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Eval => "C",
            Space::Dec => "C_dec",
        }
    }

    pub(crate) fn expect(self, expected: Space) -> Result<()> {
        if self == expected {
            Ok(())
        } else {
            Err(Error::SpaceMismatch { expected: expected.name(), actual: self.name() })
        }
    }
}

/// Snapshot of the operation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub encrypt: u64,
    pub add: u64,
    pub cmult: u64,
    pub rotate: u64,
    pub server_dec: u64,
    pub part_dec: u64,
    pub fin_dec: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.encrypt + self.add + self.cmult + self.rotate + self.server_dec + self.part_dec + self.fin_dec
    }

    /// Work done on the aggregation server: everything except encryption and PartDec,
    /// which run at the leaders.
    pub fn server_side(&self) -> u64 {
        self.add + self.cmult + self.rotate + self.server_dec + self.fin_dec
    }

    pub fn since(&self, earlier: &OpCounts) -> OpCounts {
        OpCounts {
            encrypt: self.encrypt - earlier.encrypt,
            add: self.add - earlier.add,
            cmult: self.cmult - earlier.cmult,
            rotate: self.rotate - earlier.rotate,
            server_dec: self.server_dec - earlier.server_dec,
            part_dec: self.part_dec - earlier.part_dec,
            fin_dec: self.fin_dec - earlier.fin_dec,
        }
    }
}

#[derive(Debug, Default)]
pub struct OpCounters {
    encrypt: AtomicU64,
    add: AtomicU64,
    cmult: AtomicU64,
    rotate: AtomicU64,
    server_dec: AtomicU64,
    part_dec: AtomicU64,
    fin_dec: AtomicU64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Op {
    Encrypt,
    Add,
    CMult,
    Rotate,
    ServerDec,
    PartDec,
    FinDec,
}

impl OpCounters {
    pub(crate) fn bump(&self, op: Op) {
        let c = match op {
            Op::Encrypt => &self.encrypt,
            Op::Add => &self.add,
            Op::CMult => &self.cmult,
            Op::Rotate => &self.rotate,
            Op::ServerDec => &self.server_dec,
            Op::PartDec => &self.part_dec,
            Op::FinDec => &self.fin_dec,
        };
        c.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> OpCounts {
        let g = |c: &AtomicU64| c.load(Ordering::Relaxed);
        OpCounts {
            encrypt: g(&self.encrypt),
            add: g(&self.add),
            cmult: g(&self.cmult),
            rotate: g(&self.rotate),
            server_dec: g(&self.server_dec),
            part_dec: g(&self.part_dec),
            fin_dec: g(&self.fin_dec),
        }
    }
}

/// A threshold homomorphic backend over real slot vectors.
///
/// Vectors are padded to a power-of-two period and tiled across the slots, so
/// rotations are cyclic within the period.
pub trait HeBackend: Send + Sync {
    type Ct: Clone + std::fmt::Debug + Send + Sync;
    type Pd: Clone + std::fmt::Debug + Send + Sync;

    fn name(&self) -> &'static str;
    fn slots(&self) -> usize;
    /// Level of a fresh encryption.
    fn max_level(&self) -> u32;
    fn party_count(&self) -> usize;

    fn encrypt(&self, m: &[f64], rng: &mut dyn RngCore) -> Result<Self::Ct>;
    fn add(&self, a: &Self::Ct, b: &Self::Ct) -> Result<Self::Ct>;
    fn sub(&self, a: &Self::Ct, b: &Self::Ct) -> Result<Self::Ct>;
    /// Slotwise product with a plaintext vector (one value broadcasts); consumes a level.
    fn cmult(&self, ct: &Self::Ct, constants: &[f64]) -> Result<Self::Ct>;
    fn rotate(&self, ct: &Self::Ct, rotation: Rotation) -> Result<Self::Ct>;
    fn has_rotation(&self, period: usize, rotation: Rotation) -> bool;

    fn level(&self, ct: &Self::Ct) -> u32;
    fn period(&self, ct: &Self::Ct) -> usize;
    fn space(&self, ct: &Self::Ct) -> Space;
    /// Decryption session id; 0 for ciphertexts that have not been through ServerDec.
    fn session(&self, ct: &Self::Ct) -> u64;

    fn server_dec(&self, ct: &Self::Ct, rng: &mut dyn RngCore) -> Result<Self::Ct>;
    fn part_dec(&self, party: usize, ct_dec: &Self::Ct, rng: &mut dyn RngCore) -> Result<Self::Pd>;
    fn fin_dec(&self, ct_dec: &Self::Ct, shares: &[Self::Pd]) -> Result<Vec<f64>>;

    /// Deals fresh shares of the same secret to a new party set.
    fn reshare(&mut self, parties: usize, rng: &mut dyn RngCore) -> Result<()>;

    /// Slotwise `|x|`. Needs ciphertext-ciphertext multiplication, which only
    /// the exact mock can provide.
    fn slot_abs(&self, _ct: &Self::Ct) -> Result<Self::Ct> {
        Err(Error::Unsupported("slotwise absolute value needs ciphertext multiplication"))
    }

    fn counts(&self) -> OpCounts;

    fn ct_to_bytes(&self, ct: &Self::Ct) -> Vec<u8>;
    fn ct_from_bytes(&self, bytes: &[u8]) -> Result<Self::Ct>;

    /// ServerDec, PartDec by every party, FinDec.
    fn decrypt_jointly(&self, ct: &Self::Ct, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        let dec = self.server_dec(ct, rng)?;
        let shares = (0..self.party_count()).map(|i| self.part_dec(i, &dec, rng)).collect::<Result<Vec<_>>>()?;
        self.fin_dec(&dec, &shares)
    }
}

pub(crate) fn period_for(len: usize, slots: usize) -> Result<usize> {
    let period = len.max(1).next_power_of_two();
    if period > slots {
        return Err(Error::TooManySlots { len, slots });
    }
    Ok(period)
}

pub(crate) fn check_distinct(parties: usize, ids: impl Iterator<Item = usize>, count: usize) -> Result<()> {
    if count != parties {
        return Err(Error::MissingShare { expected: parties, actual: count });
    }
    let mut seen = vec![false; parties];
    for id in ids {
        if id >= parties {
            return Err(Error::PartyOutOfRange { party: id, parties });
        }
        if std::mem::replace(&mut seen[id], true) {
            return Err(Error::DuplicateParty(id));
        }
    }
    Ok(())
}
