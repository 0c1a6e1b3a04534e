//! Polynomials in `Z_q[X]/(X^N + 1)` for power-of-two `q`.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};

use crate::bigint::U256;

/// Dense polynomial with 256-bit coefficients; the modulus is tracked by the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<U256>);

/// Polynomial with small signed coefficients, stored sparsely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallPoly {
    pub n: usize,
    pub terms: Vec<(usize, i64)>,
}

impl SmallPoly {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    pub fn from_dense(coeffs: &[i64]) -> Self {
        Self {
            n: coeffs.len(),
            terms: coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (i, c)).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<i64> {
        let mut out = vec![0; self.n];
        for &(i, c) in &self.terms {
            out[i] += c;
        }
        out
    }

    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::zero(self.n);
        for &(i, c) in &self.terms {
            p.0[i] += U256::from_i128(c as i128);
        }
        p
    }

    /// `σ_g(self)`: `X^i ↦ X^{i·g mod 2N}`.
    pub fn automorphism(&self, g: usize) -> Self {
        let n = self.n;
        let terms = self
            .terms
            .iter()
            .map(|&(i, c)| {
                let t = (i * g) % (2 * n);
                if t < n {
                    (t, c)
                } else {
                    (t - n, -c)
                }
            })
            .collect();
        Self { n, terms }
    }

    pub fn max_abs(&self) -> i64 {
        self.terms.iter().map(|t| t.1.abs()).max().unwrap_or(0)
    }
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Self(vec![U256::ZERO; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mask(&mut self, bits: u32) {
        for c in &mut self.0 {
            *c = c.mask(bits);
        }
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += *b;
        }
    }

    pub fn sub_assign(&mut self, rhs: &Self) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a -= *b;
        }
    }

    pub fn add_small(&mut self, rhs: &SmallPoly) {
        for &(i, c) in &rhs.terms {
            self.0[i] += U256::from_i128(c as i128);
        }
    }

    /// Negacyclic product with a small polynomial, modulo 2^256.
    pub fn mul_small(&self, small: &SmallPoly) -> Self {
        let n = self.len();
        let mut out = Self::zero(n);
        self.mul_small_acc(small, &mut out);
        out
    }

    /// `out += self · small`, negacyclic, modulo 2^256.
    pub fn mul_small_acc(&self, small: &SmallPoly, out: &mut Self) {
        let n = self.len();
        let a = &self.0;
        for &(i, c) in &small.terms {
            let (head, tail) = out.0.split_at_mut(i);
            // X^i·X^j for j < n−i lands at i+j.
            for (o, x) in tail.iter_mut().zip(&a[..n - i]) {
                o.mul_add_i64(x, c);
            }
            // The rest wraps past X^n and flips sign.
            for (o, x) in head.iter_mut().zip(&a[n - i..]) {
                o.mul_add_i64(x, -c);
            }
        }
    }

    /// Negacyclic product of two dense polynomials, modulo 2^256.
    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.len();
        let mut out = Self::zero(n);
        for (i, x) in self.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in rhs.0.iter().enumerate() {
                let p = x.wrapping_mul(y);
                let k = i + j;
                if k < n {
                    out.0[k] += p;
                } else {
                    out.0[k - n] -= p;
                }
            }
        }
        out
    }

    pub fn automorphism(&self, g: usize) -> Self {
        let n = self.len();
        let mut out = Self::zero(n);
        for (i, &c) in self.0.iter().enumerate() {
            let t = (i * g) % (2 * n);
            if t < n {
                out.0[t] = c;
            } else {
                out.0[t - n] = -c;
            }
        }
        out
    }

    /// Exact division by `2^shift` with rounding to nearest, then reduction mod `2^out_bits`.
    /// Inputs must be reduced modulo `2^in_bits` with `in_bits < 256`.
    pub fn rescale(&self, shift: u32, out_bits: u32) -> Self {
        let half = U256::pow2(shift - 1);
        Self(self.0.iter().map(|&c| (c + half).shift_right(shift).mask(out_bits)).collect())
    }

    /// Signed coefficient values modulo `2^bits`.
    pub fn centered(&self, bits: u32) -> Vec<f64> {
        self.0.iter().map(|c| c.centered_f64(bits)).collect()
    }
}

pub fn uniform(n: usize, bits: u32, rng: &mut dyn RngCore) -> Poly {
    Poly((0..n).map(|_| U256([rng.next_u64(), rng.next_u64(), rng.next_u64(), rng.next_u64()]).mask(bits)).collect())
}

/// Rounded continuous Gaussian; `sigma = 0` gives the zero polynomial.
pub fn gaussian(n: usize, sigma: f64, rng: &mut dyn RngCore) -> SmallPoly {
    if sigma <= 0.0 {
        return SmallPoly::zero(n);
    }
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let dense: Vec<i64> = (0..n).map(|_| normal.sample(rng).round() as i64).collect();
    SmallPoly::from_dense(&dense)
}

/// Signed ternary vector with exactly `h` non-zero entries.
pub fn hamming_ternary(n: usize, h: usize, rng: &mut dyn RngCore) -> SmallPoly {
    let positions = rand::seq::index::sample(rng, n, h.min(n));
    let mut terms: Vec<(usize, i64)> =
        positions.into_iter().map(|i| (i, if rng.random::<bool>() { 1 } else { -1 })).collect();
    terms.sort_unstable();
    SmallPoly { n, terms }
}

/// Each entry is ±1 with probability ρ/2 and 0 otherwise.
pub fn zero_one(n: usize, rho: f64, rng: &mut dyn RngCore) -> SmallPoly {
    let terms = (0..n)
        .filter_map(|i| {
            let u: f64 = rng.random();
            if u < rho / 2.0 {
                Some((i, 1))
            } else if u < rho {
                Some((i, -1))
            } else {
                None
            }
        })
        .collect();
    SmallPoly { n, terms }
}
