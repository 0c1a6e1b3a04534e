//! Exact plaintext stand-in for the lattice backend.
//!
//! Tracks levels, spaces and periods exactly like the real scheme so protocol
//! code exercises the same checks, but stores the slot values in the clear.

use rand::RngCore;

use crate::backend::{check_distinct, period_for, HeBackend, Op, OpCounters, OpCounts, Rotation, Space};
use crate::error::{Error, Result};
use crate::wire::{space_from_tag, space_tag, Reader, VERSION};

pub const MAGIC: &[u8; 4] = b"OFLM";

#[derive(Debug, Clone, PartialEq)]
pub struct MockCiphertext {
    pub values: Vec<f64>,
    pub level: u32,
    pub space: Space,
    pub session: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MockShare {
    pub party: usize,
    pub session: u64,
}

#[derive(Debug)]
pub struct MockBackend {
    slots: usize,
    levels: u32,
    parties: usize,
    counters: OpCounters,
}

impl MockBackend {
    pub fn new(slots: usize, levels: u32, parties: usize) -> Self {
        Self { slots, levels, parties, counters: OpCounters::default() }
    }

    /// Same slot count and depth as [`crate::ThFheParams::desk`].
    pub fn desk(parties: usize) -> Self {
        let p = crate::ThFheParams::desk();
        Self::new(p.slots(), p.levels, parties)
    }

    fn zip(&self, a: &MockCiphertext, b: &MockCiphertext, f: impl Fn(f64, f64) -> f64) -> Result<MockCiphertext> {
        a.space.expect(Space::Eval)?;
        b.space.expect(Space::Eval)?;
        if a.level != b.level {
            return Err(Error::LevelMismatch { left: a.level, right: b.level });
        }
        if a.values.len() != b.values.len() {
            return Err(Error::PeriodMismatch { left: a.values.len(), right: b.values.len() });
        }
        self.counters.bump(Op::Add);
        Ok(MockCiphertext { values: a.values.iter().zip(&b.values).map(|(&x, &y)| f(x, y)).collect(), ..a.clone() })
    }
}

impl HeBackend for MockBackend {
    type Ct = MockCiphertext;
    type Pd = MockShare;

    fn name(&self) -> &'static str {
        "mock"
    }

    fn slots(&self) -> usize {
        self.slots
    }

    fn max_level(&self) -> u32 {
        self.levels
    }

    fn party_count(&self) -> usize {
        self.parties
    }

    fn encrypt(&self, m: &[f64], _rng: &mut dyn RngCore) -> Result<MockCiphertext> {
        let period = period_for(m.len(), self.slots)?;
        if let Some(index) = m.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let mut values = m.to_vec();
        values.resize(period, 0.0);
        self.counters.bump(Op::Encrypt);
        Ok(MockCiphertext { values, level: self.levels, space: Space::Eval, session: 0 })
    }

    fn add(&self, a: &MockCiphertext, b: &MockCiphertext) -> Result<MockCiphertext> {
        self.zip(a, b, |x, y| x + y)
    }

    fn sub(&self, a: &MockCiphertext, b: &MockCiphertext) -> Result<MockCiphertext> {
        self.zip(a, b, |x, y| x - y)
    }

    fn cmult(&self, ct: &MockCiphertext, constants: &[f64]) -> Result<MockCiphertext> {
        ct.space.expect(Space::Eval)?;
        if ct.level < 2 {
            return Err(Error::DepthExceeded { level: ct.level });
        }
        let n = ct.values.len();
        if constants.len() != n && !(constants.len() == 1) {
            return Err(Error::PeriodMismatch { left: n, right: constants.len() });
        }
        self.counters.bump(Op::CMult);
        Ok(MockCiphertext {
            values: (0..n).map(|i| ct.values[i] * constants[i % constants.len()]).collect(),
            level: ct.level - 1,
            ..ct.clone()
        })
    }

    fn rotate(&self, ct: &MockCiphertext, rotation: Rotation) -> Result<MockCiphertext> {
        ct.space.expect(Space::Eval)?;
        let n = ct.values.len();
        let r = rotation.left_amount(n);
        self.counters.bump(Op::Rotate);
        Ok(MockCiphertext { values: (0..n).map(|i| ct.values[(i + r) % n]).collect(), ..ct.clone() })
    }

    fn has_rotation(&self, _period: usize, _rotation: Rotation) -> bool {
        true
    }

    fn level(&self, ct: &MockCiphertext) -> u32 {
        ct.level
    }

    fn period(&self, ct: &MockCiphertext) -> usize {
        ct.values.len()
    }

    fn space(&self, ct: &MockCiphertext) -> Space {
        ct.space
    }

    fn session(&self, ct: &MockCiphertext) -> u64 {
        ct.session
    }

    fn server_dec(&self, ct: &MockCiphertext, rng: &mut dyn RngCore) -> Result<MockCiphertext> {
        ct.space.expect(Space::Eval)?;
        if ct.level < 3 {
            return Err(Error::DepthExceeded { level: ct.level });
        }
        self.counters.bump(Op::ServerDec);
        Ok(MockCiphertext {
            values: ct.values.clone(),
            level: ct.level - 1,
            space: Space::Dec,
            session: rng.next_u64() | 1,
        })
    }

    fn part_dec(&self, party: usize, ct_dec: &MockCiphertext, _rng: &mut dyn RngCore) -> Result<MockShare> {
        ct_dec.space.expect(Space::Dec)?;
        if party >= self.parties {
            return Err(Error::PartyOutOfRange { party, parties: self.parties });
        }
        self.counters.bump(Op::PartDec);
        Ok(MockShare { party, session: ct_dec.session })
    }

    fn fin_dec(&self, ct_dec: &MockCiphertext, shares: &[MockShare]) -> Result<Vec<f64>> {
        ct_dec.space.expect(Space::Dec)?;
        check_distinct(self.parties, shares.iter().map(|s| s.party), shares.len())?;
        if shares.iter().any(|s| s.session != ct_dec.session) {
            return Err(Error::SessionMismatch);
        }
        self.counters.bump(Op::FinDec);
        Ok(ct_dec.values.clone())
    }

    fn reshare(&mut self, parties: usize, _rng: &mut dyn RngCore) -> Result<()> {
        if parties == 0 {
            return Err(Error::InvalidParams("party count must be at least 1".into()));
        }
        self.parties = parties;
        Ok(())
    }

    fn slot_abs(&self, ct: &MockCiphertext) -> Result<MockCiphertext> {
        ct.space.expect(Space::Eval)?;
        Ok(MockCiphertext { values: ct.values.iter().map(|v| v.abs()).collect(), ..ct.clone() })
    }

    fn counts(&self) -> OpCounts {
        self.counters.snapshot()
    }

    /// `"OFLM" | version u16 | space u8 | level u8 | session u64 | count u32 | count × f64`.
    fn ct_to_bytes(&self, ct: &MockCiphertext) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + 8 * ct.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(space_tag(ct.space));
        out.push(ct.level as u8);
        out.extend_from_slice(&ct.session.to_le_bytes());
        out.extend_from_slice(&(ct.values.len() as u32).to_le_bytes());
        for v in &ct.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    fn ct_from_bytes(&self, bytes: &[u8]) -> Result<MockCiphertext> {
        let mut r = Reader { bytes, pos: 0 };
        r.header(MAGIC)?;
        let at = r.pos;
        let space = space_from_tag(r.u8("space")?, at)?;
        let level = r.u8("level")? as u32;
        let session = r.u64("session")?;
        let count = r.u32("count")? as usize;
        let raw = r.take(count * 8, "values")?;
        r.finish()?;
        Ok(MockCiphertext {
            values: raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect(),
            level,
            space,
            session,
        })
    }
}
