//! Wrapping 256-bit unsigned integers.
//!
//! Every modulus in the scheme is a power of two no larger than 2^256, so
//! arithmetic modulo q is plain wrapping arithmetic followed by a mask.

use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct U256(pub [u64; 4]);

impl std::fmt::Debug for U256 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "0x{:016x}{:016x}{:016x}{:016x}", self.0[3], self.0[2], self.0[1], self.0[0])
    }
}

#[inline]
fn adc(a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = a as u128 + b as u128 + carry as u128;
    (t as u64, (t >> 64) as u64)
}

#[inline]
fn sbb(a: u64, b: u64, borrow: u64) -> (u64, u64) {
    let t = (a as u128).wrapping_sub(b as u128 + borrow as u128);
    (t as u64, ((t >> 64) as u64) & 1)
}

impl U256 {
    pub const ZERO: Self = Self([0; 4]);
    pub const ONE: Self = Self([1, 0, 0, 0]);

    pub const fn from_u64(v: u64) -> Self {
        Self([v, 0, 0, 0])
    }

    /// Two's complement embedding, i.e. `v mod 2^256`.
    pub fn from_i128(v: i128) -> Self {
        let lo = v as u128;
        let hi = if v < 0 { u64::MAX } else { 0 };
        Self([lo as u64, (lo >> 64) as u64, hi, hi])
    }

    /// `2^bits`, wrapping to zero at 256.
    pub fn pow2(bits: u32) -> Self {
        let mut r = Self::ZERO;
        if bits < 256 {
            r.0[(bits / 64) as usize] = 1 << (bits % 64);
        }
        r
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    /// Reduces modulo `2^bits`.
    #[inline]
    pub fn mask(mut self, bits: u32) -> Self {
        for (i, limb) in self.0.iter_mut().enumerate() {
            let lo = i as u32 * 64;
            if bits <= lo {
                *limb = 0;
            } else if bits < lo + 64 {
                *limb &= (1u64 << (bits - lo)) - 1;
            }
        }
        self
    }

    /// Position of the highest set bit plus one; zero for zero.
    pub fn bit_len(&self) -> u32 {
        (0..4).rev().find(|&i| self.0[i] != 0).map_or(0, |i| i as u32 * 64 + 64 - self.0[i].leading_zeros())
    }

    pub fn bit(&self, i: u32) -> bool {
        i < 256 && (self.0[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    /// Logical right shift.
    pub fn shift_right(self, s: u32) -> Self {
        if s >= 256 {
            return Self::ZERO;
        }
        let (limbs, bits) = ((s / 64) as usize, s % 64);
        let mut r = [0u64; 4];
        for (i, out) in r.iter_mut().take(4 - limbs).enumerate() {
            let lo = self.0[i + limbs] >> bits;
            let hi = if bits > 0 && i + limbs + 1 < 4 { self.0[i + limbs + 1] << (64 - bits) } else { 0 };
            *out = lo | hi;
        }
        Self(r)
    }

    /// Extracts `width ≤ 64` bits starting at bit `start`.
    pub fn bits(&self, start: u32, width: u32) -> u64 {
        let v = self.shift_right(start).0[0];
        if width >= 64 {
            v
        } else {
            v & ((1u64 << width) - 1)
        }
    }

    /// `self += x·k` modulo 2^256.
    #[inline(always)]
    pub fn mul_add_u64(&mut self, x: &Self, k: u64) {
        let mut carry = 0u64;
        for i in 0..4 {
            let t = x.0[i] as u128 * k as u128 + self.0[i] as u128 + carry as u128;
            self.0[i] = t as u64;
            carry = (t >> 64) as u64;
        }
    }

    /// `self -= x·k` modulo 2^256.
    #[inline(always)]
    pub fn mul_sub_u64(&mut self, x: &Self, k: u64) {
        let mut prod = Self::ZERO;
        prod.mul_add_u64(x, k);
        *self -= prod;
    }

    /// `self += x·k` for a signed small multiplier.
    #[inline(always)]
    pub fn mul_add_i64(&mut self, x: &Self, k: i64) {
        if k >= 0 {
            self.mul_add_u64(x, k as u64);
        } else {
            self.mul_sub_u64(x, k.unsigned_abs());
        }
    }

    /// Low 256 bits of the product.
    pub fn wrapping_mul(&self, rhs: &Self) -> Self {
        let mut r = [0u64; 4];
        for i in 0..4 {
            if self.0[i] == 0 {
                continue;
            }
            let mut carry = 0u64;
            for j in 0..4 - i {
                let t = self.0[i] as u128 * rhs.0[j] as u128 + r[i + j] as u128 + carry as u128;
                r[i + j] = t as u64;
                carry = (t >> 64) as u64;
            }
        }
        Self(r)
    }

    /// Signed value of `self mod 2^bits` in `[−2^(bits−1), 2^(bits−1))`, as `f64`.
    pub fn centered_f64(&self, bits: u32) -> f64 {
        let v = self.mask(bits);
        if bits > 0 && v.bit(bits - 1) {
            -(Self::pow2(bits) - v).mask(bits).to_f64()
        } else {
            v.to_f64()
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &limb| acc * 18_446_744_073_709_551_616.0 + limb as f64)
    }

    pub fn to_le_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (i, limb) in self.0.iter().enumerate() {
            out[i * 8..(i + 1) * 8].copy_from_slice(&limb.to_le_bytes());
        }
        out
    }

    /// Reads up to 32 little-endian bytes.
    pub fn from_le_slice(bytes: &[u8]) -> Self {
        let mut buf = [0u8; 32];
        buf[..bytes.len()].copy_from_slice(bytes);
        let mut r = [0u64; 4];
        for (i, limb) in r.iter_mut().enumerate() {
            *limb = u64::from_le_bytes(buf[i * 8..(i + 1) * 8].try_into().unwrap());
        }
        Self(r)
    }
}

impl Add for U256 {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for U256 {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        let mut c = 0;
        for i in 0..4 {
            (self.0[i], c) = adc(self.0[i], rhs.0[i], c);
        }
    }
}

impl Sub for U256 {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl SubAssign for U256 {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        let mut b = 0;
        for i in 0..4 {
            (self.0[i], b) = sbb(self.0[i], rhs.0[i], b);
        }
    }
}

impl Neg for U256 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::ZERO - self
    }
}
