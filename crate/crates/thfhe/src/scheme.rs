//! The lattice backend.
//!
//! A ciphertext `(c1, c2)` at level `l` decrypts as `c2 + c1·s mod q_l`. The
//! encoded message sits in `c2` next to `v·b`; `c1 = v·a + e1` is the component
//! each party multiplies by its key share.

use rand::{Rng, RngCore};

use crate::backend::{check_distinct, period_for, HeBackend, Op, OpCounters, OpCounts, Rotation, Space};
use crate::bigint::U256;
use crate::encoding::Encoder;
use crate::error::{Error, Result};
use crate::keys::{keygen, KeyMaterial};
use crate::params::ThFheParams;
use crate::ring::{gaussian, zero_one, Poly, SmallPoly};
use crate::wire;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub c1: Poly,
    pub c2: Poly,
    /// Modulus is `2^(p_bits·level)`.
    pub level: u32,
    pub space: Space,
    /// Logical vector length; the slots hold `slots / period` copies.
    pub period: usize,
    /// `log2` of the message scale.
    pub scale_bits: u32,
    /// Decryption session this `C_dec` value belongs to (0 in `C`).
    pub session: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialDecryption {
    pub party: usize,
    pub session: u64,
    pub share: Poly,
}

pub struct ThFhe {
    params: ThFheParams,
    encoder: Encoder,
    keys: KeyMaterial,
    counters: OpCounters,
}

impl std::fmt::Debug for ThFhe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThFhe")
            .field("params", &self.params)
            .field("parties", &self.keys.party_count())
            .field("rotation_keys", &self.keys.eval_key.rotations.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl ThFhe {
    /// Runs KeyGen for `parties` share holders with rotation keys for the given left shifts.
    pub fn new(params: ThFheParams, parties: usize, rotations: &[usize], rng: &mut dyn RngCore) -> Result<Self> {
        let keys = keygen(&params, parties, rotations, rng)?;
        Ok(Self { encoder: Encoder::new(params.ring_degree), params, keys, counters: OpCounters::default() })
    }

    pub fn params(&self) -> &ThFheParams {
        &self.params
    }

    pub fn keys(&self) -> &KeyMaterial {
        &self.keys
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    fn bits(&self, level: u32) -> u32 {
        self.params.modulus_bits(level)
    }

    /// `(v·a + e1, v·b + e2 + msg) mod q_level`.
    fn encrypt_poly(&self, msg: &Poly, level: u32, rng: &mut dyn RngCore) -> (Poly, Poly) {
        let n = self.params.ring_degree;
        let bits = self.bits(level);
        let v = zero_one(n, self.params.rho, rng);
        let sigma = if self.params.fresh_noise { self.params.sigma } else { 0.0 };
        let pk = &self.keys.public_key;
        let mut c1 = pk.a.mul_small(&v);
        c1.add_small(&gaussian(n, sigma, rng));
        let mut c2 = pk.b.mul_small(&v);
        c2.add_small(&gaussian(n, sigma, rng));
        c2.add_assign(msg);
        c1.mask(bits);
        c2.mask(bits);
        (c1, c2)
    }

    fn check_pair(&self, a: &Ciphertext, b: &Ciphertext) -> Result<()> {
        a.space.expect(Space::Eval)?;
        b.space.expect(Space::Eval)?;
        if a.level != b.level {
            return Err(Error::LevelMismatch { left: a.level, right: b.level });
        }
        if a.period != b.period {
            return Err(Error::PeriodMismatch { left: a.period, right: b.period });
        }
        if a.scale_bits != b.scale_bits {
            return Err(Error::InvalidParams("operands carry different scales".into()));
        }
        Ok(())
    }

    fn combine(&self, a: &Ciphertext, b: &Ciphertext, subtract: bool) -> Result<Ciphertext> {
        self.check_pair(a, b)?;
        self.counters.bump(Op::Add);
        let bits = self.bits(a.level);
        let mut out = a.clone();
        if subtract {
            out.c1.sub_assign(&b.c1);
            out.c2.sub_assign(&b.c2);
        } else {
            out.c1.add_assign(&b.c1);
            out.c2.add_assign(&b.c2);
        }
        out.c1.mask(bits);
        out.c2.mask(bits);
        Ok(out)
    }

    /// `⌊(c + u)/p⌋` with `u` uniform in `[0, width·p)`, i.e. randomized rounding.
    fn randomized_rescale(&self, poly: &Poly, width: f64, out_bits: u32, rng: &mut dyn RngCore) -> Poly {
        let shift = self.params.p_bits;
        if width <= 0.0 {
            return poly.rescale(shift, out_bits);
        }
        let span = ((width * self.params.p()).round() as u64).max(1);
        Poly(
            poly.0
                .iter()
                .map(|&c| (c + U256::from_u64(rng.random_range(0..span))).shift_right(shift).mask(out_bits))
                .collect(),
        )
    }

    fn key_switch(&self, ct: &Ciphertext, amount: usize) -> Result<Ciphertext> {
        let key = self.keys.eval_key.rotations.get(&amount).ok_or(Error::MissingRotationKey(amount))?;
        let n = self.params.ring_degree;
        let bits = self.bits(ct.level);
        let w = self.params.gadget_bits;
        let rc1 = ct.c1.automorphism(key.galois);
        let mut c2 = ct.c2.automorphism(key.galois);
        let mut c1 = Poly::zero(n);
        for (t, (ka, kb)) in key.digits.iter().enumerate().take(bits.div_ceil(w) as usize) {
            let digit =
                SmallPoly::from_dense(&rc1.0.iter().map(|c| c.bits(t as u32 * w, w) as i64).collect::<Vec<_>>());
            ka.mul_small_acc(&digit, &mut c1);
            kb.mul_small_acc(&digit, &mut c2);
        }
        c1.mask(bits);
        c2.mask(bits);
        Ok(Ciphertext { c1, c2, ..ct.clone() })
    }
}

impl HeBackend for ThFhe {
    type Ct = Ciphertext;
    type Pd = PartialDecryption;

    fn name(&self) -> &'static str {
        "real"
    }

    fn slots(&self) -> usize {
        self.params.slots()
    }

    fn max_level(&self) -> u32 {
        self.params.levels
    }

    fn party_count(&self) -> usize {
        self.keys.party_count()
    }

    fn encrypt(&self, m: &[f64], rng: &mut dyn RngCore) -> Result<Ciphertext> {
        let period = period_for(m.len(), self.slots())?;
        let level = self.params.levels;
        let coeffs = self.encoder.encode(m, period, self.params.scale(), self.bits(level))?;
        let msg = Poly(coeffs.into_iter().map(U256::from_i128).collect());
        let (c1, c2) = self.encrypt_poly(&msg, level, rng);
        self.counters.bump(Op::Encrypt);
        Ok(Ciphertext {
            c1,
            c2,
            level,
            space: Space::Eval,
            period,
            scale_bits: self.params.p_bits * self.params.scale_levels,
            session: 0,
        })
    }

    fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.combine(a, b, false)
    }

    fn sub(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.combine(a, b, true)
    }

    fn cmult(&self, ct: &Ciphertext, constants: &[f64]) -> Result<Ciphertext> {
        ct.space.expect(Space::Eval)?;
        if ct.level < 2 {
            return Err(Error::DepthExceeded { level: ct.level });
        }
        let tiled;
        let constants = if constants.len() == 1 && ct.period > 1 {
            tiled = vec![constants[0]; ct.period];
            &tiled[..]
        } else {
            constants
        };
        if constants.len() != ct.period {
            return Err(Error::PeriodMismatch { left: ct.period, right: constants.len() });
        }
        let coeffs = self.encoder.encode(constants, ct.period, self.params.p(), 63)?;
        let k = SmallPoly::from_dense(&coeffs.into_iter().map(|c| c as i64).collect::<Vec<_>>());
        let in_bits = self.bits(ct.level);
        let out_bits = self.bits(ct.level - 1);
        let mut c1 = ct.c1.mul_small(&k);
        let mut c2 = ct.c2.mul_small(&k);
        c1.mask(in_bits);
        c2.mask(in_bits);
        self.counters.bump(Op::CMult);
        Ok(Ciphertext {
            c1: c1.rescale(self.params.p_bits, out_bits),
            c2: c2.rescale(self.params.p_bits, out_bits),
            level: ct.level - 1,
            ..ct.clone()
        })
    }

    fn rotate(&self, ct: &Ciphertext, rotation: Rotation) -> Result<Ciphertext> {
        ct.space.expect(Space::Eval)?;
        let amount = rotation.left_amount(ct.period);
        self.counters.bump(Op::Rotate);
        if amount == 0 {
            return Ok(ct.clone());
        }
        self.key_switch(ct, amount)
    }

    fn has_rotation(&self, period: usize, rotation: Rotation) -> bool {
        let amount = rotation.left_amount(period);
        amount == 0 || self.keys.eval_key.rotations.contains_key(&amount)
    }

    fn level(&self, ct: &Ciphertext) -> u32 {
        ct.level
    }

    fn period(&self, ct: &Ciphertext) -> usize {
        ct.period
    }

    fn space(&self, ct: &Ciphertext) -> Space {
        ct.space
    }

    fn session(&self, ct: &Ciphertext) -> u64 {
        ct.session
    }

    /// Re-randomizes with a fresh encryption of zero, floods `c1`, and rescales
    /// both components by `1/p` with randomized rounding into `q_(level−1)`.
    ///
    /// At the top level the output modulus is exactly `q_dec`; below it,
    /// `q_(level−1)` divides `q_dec`, so the same key shares still apply.
    fn server_dec(&self, ct: &Ciphertext, rng: &mut dyn RngCore) -> Result<Ciphertext> {
        ct.space.expect(Space::Eval)?;
        if ct.level < 3 {
            return Err(Error::DepthExceeded { level: ct.level });
        }
        let n = self.params.ring_degree;
        let bits = self.bits(ct.level);
        let (z1, z2) = self.encrypt_poly(&Poly::zero(n), ct.level, rng);
        let mut c1 = ct.c1.clone();
        let mut c2 = ct.c2.clone();
        c1.add_assign(&z1);
        c2.add_assign(&z2);
        c1.add_small(&gaussian(n, self.params.sigma_flood, rng));
        c1.mask(bits);
        c2.mask(bits);
        let out_bits = self.bits(ct.level - 1);
        let c1 = self.randomized_rescale(&c1, self.params.sigma1, out_bits, rng);
        let c2 = self.randomized_rescale(&c2, self.params.sigma2, out_bits, rng);
        self.counters.bump(Op::ServerDec);
        Ok(Ciphertext {
            c1,
            c2,
            level: ct.level - 1,
            space: Space::Dec,
            period: ct.period,
            scale_bits: ct.scale_bits - self.params.p_bits,
            session: rng.next_u64() | 1,
        })
    }

    /// `pd_i = c1·sk_i + z_i`.
    fn part_dec(&self, party: usize, ct_dec: &Ciphertext, rng: &mut dyn RngCore) -> Result<PartialDecryption> {
        ct_dec.space.expect(Space::Dec)?;
        let parties = self.party_count();
        let share = self.keys.shares.get(party).ok_or(Error::PartyOutOfRange { party, parties })?;
        let bits = self.bits(ct_dec.level);
        let mut pd = ct_dec.c1.mul(&share.poly);
        pd.add_small(&gaussian(self.params.ring_degree, self.params.eta, rng));
        pd.mask(bits);
        self.counters.bump(Op::PartDec);
        Ok(PartialDecryption { party, session: ct_dec.session, share: pd })
    }

    /// `Σ pd_i + c2`, decoded. All parties must contribute exactly once.
    fn fin_dec(&self, ct_dec: &Ciphertext, shares: &[PartialDecryption]) -> Result<Vec<f64>> {
        ct_dec.space.expect(Space::Dec)?;
        check_distinct(self.party_count(), shares.iter().map(|s| s.party), shares.len())?;
        if shares.iter().any(|s| s.session != ct_dec.session) {
            return Err(Error::SessionMismatch);
        }
        let bits = self.bits(ct_dec.level);
        let mut pt = ct_dec.c2.clone();
        for s in shares {
            pt.add_assign(&s.share);
        }
        pt.mask(bits);
        self.counters.bump(Op::FinDec);
        let scale = 2f64.powi(ct_dec.scale_bits as i32);
        Ok(self.encoder.decode(&pt.centered(bits), scale, ct_dec.period))
    }

    fn reshare(&mut self, parties: usize, rng: &mut dyn RngCore) -> Result<()> {
        self.keys.reshare(&self.params, parties, rng)
    }

    fn counts(&self) -> OpCounts {
        self.counters.snapshot()
    }

    fn ct_to_bytes(&self, ct: &Ciphertext) -> Vec<u8> {
        wire::encode_ciphertext(ct)
    }

    fn ct_from_bytes(&self, bytes: &[u8]) -> Result<Ciphertext> {
        let ct = wire::decode_ciphertext(bytes)?;
        if ct.c1.len() != self.params.ring_degree {
            return Err(Error::Decode {
                offset: 0,
                reason: format!("ring degree {} does not match {}", ct.c1.len(), self.params.ring_degree),
            });
        }
        Ok(ct)
    }
}
