//! Key generation and dealer-side resharing.

use std::collections::BTreeMap;

use rand::RngCore;

use crate::encoding::Encoder;
use crate::error::{Error, Result};
use crate::params::ThFheParams;
use crate::ring::{gaussian, hamming_ternary, uniform, Poly, SmallPoly};

/// `pk = (b, a)` with `b = −a·s + e` in `R_{q_L}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub b: Poly,
    pub a: Poly,
}

/// Gadget key switching from `σ_g(s)` back to `s`: entry `t` encrypts `2^(t·w)·σ_g(s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationKey {
    pub galois: usize,
    pub digits: Vec<(Poly, Poly)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvaluationKey {
    /// Left rotation amount in slots → key.
    pub rotations: BTreeMap<usize, RotationKey>,
}

/// Additive share of the secret modulo `q_dec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretShare {
    pub party: usize,
    pub poly: Poly,
}

#[derive(Debug, Clone)]
pub struct KeyMaterial {
    pub public_key: PublicKey,
    pub eval_key: EvaluationKey,
    pub shares: Vec<SecretShare>,
    secret: SmallPoly,
}

impl KeyMaterial {
    /// The dealer's copy of `s`. Parties only ever see their share.
    pub fn secret(&self) -> &SmallPoly {
        &self.secret
    }

    pub fn party_count(&self) -> usize {
        self.shares.len()
    }
}

/// Left rotations needed by a radix-2 transform over `period` slots and by
/// rotate-and-add slot sums: `period/2^i` and `period − period/2^i`.
pub fn power_of_two_rotations(period: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut s = period / 2;
    while s >= 1 {
        out.push(s);
        out.push(period - s);
        s /= 2;
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Completes an additive sharing in `Z_modulus`: returns `x` with `Σ shares + x ≡ target`.
pub fn complete_share_mod(target: u64, shares: &[u64], modulus: u64) -> u64 {
    let m = modulus as u128;
    let sum = shares.iter().fold(0u128, |acc, &s| (acc + s as u128 % m) % m);
    ((target as u128 % m + m - sum) % m) as u64
}

fn split_secret(params: &ThFheParams, secret: &SmallPoly, parties: usize, rng: &mut dyn RngCore) -> Vec<SecretShare> {
    let n = params.ring_degree;
    let bits = params.dec_bits();
    let mut last = secret.to_poly();
    let mut shares = Vec::with_capacity(parties);
    for party in 0..parties - 1 {
        let poly = uniform(n, bits, rng);
        last.sub_assign(&poly);
        shares.push(SecretShare { party, poly });
    }
    last.mask(bits);
    shares.push(SecretShare { party: parties - 1, poly: last });
    shares
}

fn rotation_key(params: &ThFheParams, secret: &SmallPoly, galois: usize, rng: &mut dyn RngCore) -> RotationKey {
    let n = params.ring_degree;
    let bits = params.modulus_bits(params.levels);
    let rotated = secret.automorphism(galois).to_poly();
    let count = bits.div_ceil(params.gadget_bits);
    let digits = (0..count)
        .map(|t| {
            let a = uniform(n, bits, rng);
            let mut b = Poly::zero(n);
            b.sub_assign(&a.mul_small(secret));
            b.add_small(&gaussian(n, params.sigma, rng));
            let shift = crate::bigint::U256::pow2(t * params.gadget_bits);
            for (dst, src) in b.0.iter_mut().zip(&rotated.0) {
                *dst += src.wrapping_mul(&shift);
            }
            b.mask(bits);
            (a, b)
        })
        .collect();
    RotationKey { galois, digits }
}

/// Samples `s ← HWT(h)`, `pk = (−a·s + e, a)`, rotation keys for the requested
/// left shifts, and `parties` additive shares of `s` modulo `q_dec`.
pub fn keygen(params: &ThFheParams, parties: usize, rotations: &[usize], rng: &mut dyn RngCore) -> Result<KeyMaterial> {
    params.validate()?;
    if parties == 0 {
        return Err(Error::InvalidParams("party count must be at least 1".into()));
    }
    let n = params.ring_degree;
    let bits = params.modulus_bits(params.levels);
    let secret = hamming_ternary(n, params.hamming_weight, rng);
    let a = uniform(n, bits, rng);
    let mut b = Poly::zero(n);
    b.sub_assign(&a.mul_small(&secret));
    b.add_small(&gaussian(n, params.sigma, rng));
    b.mask(bits);

    let encoder = Encoder::new(n);
    let mut eval_key = EvaluationKey::default();
    for &r in rotations {
        let r = r % params.slots();
        if r == 0 || eval_key.rotations.contains_key(&r) {
            continue;
        }
        let key = rotation_key(params, &secret, encoder.galois_element(r), rng);
        eval_key.rotations.insert(r, key);
    }
    let shares = split_secret(params, &secret, parties, rng);
    Ok(KeyMaterial { public_key: PublicKey { b, a }, eval_key, shares, secret })
}

impl KeyMaterial {
    /// Trusted-dealer resharing of the same secret among a new party set.
    pub fn reshare(&mut self, params: &ThFheParams, parties: usize, rng: &mut dyn RngCore) -> Result<()> {
        if parties == 0 {
            return Err(Error::InvalidParams("party count must be at least 1".into()));
        }
        self.shares = split_secret(params, &self.secret, parties, rng);
        Ok(())
    }
}
