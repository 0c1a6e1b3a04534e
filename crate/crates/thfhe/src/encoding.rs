//! Canonical-embedding encoder for real slot vectors.
//!
//! Slot `j` is the evaluation at `ζ^(5^j)` with `ζ = e^(iπ/N)`, so the
//! automorphism `X ↦ X^(5^r)` rotates slots left by `r`. Only real slot values
//! are supported, which makes both directions cosine transforms.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Encoder {
    n: usize,
    /// `cos(π t / N)` for `t ∈ [0, 2N)`.
    cos: Vec<f64>,
    /// `5^j mod 2N` for `j ∈ [0, N/2)`.
    pow5: Vec<usize>,
}

impl Encoder {
    pub fn new(ring_degree: usize) -> Self {
        let n = ring_degree;
        let cos = (0..2 * n).map(|t| (std::f64::consts::PI * t as f64 / n as f64).cos()).collect();
        let mut pow5 = Vec::with_capacity(n / 2);
        let mut g = 1usize;
        for _ in 0..n / 2 {
            pow5.push(g);
            g = g * 5 % (2 * n);
        }
        Self { n, cos, pow5 }
    }

    pub fn slots(&self) -> usize {
        self.n / 2
    }

    /// Galois element for a left rotation by `r` slots.
    pub fn galois_element(&self, r: usize) -> usize {
        self.pow5[r % self.slots()]
    }

    /// Encodes `values` tiled with `period` across all slots, scaled and rounded.
    ///
    /// Fails if a coefficient does not fit in `2^(max_bits − 1)` in absolute value.
    pub fn encode(&self, values: &[f64], period: usize, scale: f64, max_bits: u32) -> Result<Vec<i128>> {
        let slots = self.slots();
        if values.len() > period || period == 0 || !slots.is_multiple_of(period) {
            return Err(Error::TooManySlots { len: values.len(), slots });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let two_n = 2 * self.n;
        let limit = 2f64.powi(max_bits.min(126) as i32 - 1);
        let factor = 2.0 * scale / self.n as f64;
        let mut out = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let mut acc = 0.0;
            for (j, &g) in self.pow5.iter().enumerate() {
                let z = values.get(j % period).copied().unwrap_or(0.0);
                if z != 0.0 {
                    acc += z * self.cos[g * k % two_n];
                }
            }
            let c = (acc * factor).round();
            if c.abs() >= limit {
                return Err(Error::Overflow);
            }
            out.push(c as i128);
        }
        Ok(out)
    }

    /// First `count` slot values of the polynomial with the given signed coefficients.
    pub fn decode(&self, coeffs: &[f64], scale: f64, count: usize) -> Vec<f64> {
        let two_n = 2 * self.n;
        self.pow5[..count.min(self.slots())]
            .iter()
            .map(|&g| coeffs.iter().enumerate().map(|(k, &m)| m * self.cos[g * k % two_n]).sum::<f64>() / scale)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_constant_vectors() {
        let e = Encoder::new(64);
        assert!(e.encode(&[0.0; 32], 32, 1e6, 60).unwrap().iter().all(|&c| c == 0));
        let c = e.encode(&[0.75], 1, 2f64.powi(30), 60).unwrap();
        assert_eq!(c[0], (0.75 * 2f64.powi(30)) as i128);
        assert!(c[1..].iter().all(|&x| x.abs() <= 1));
    }

    #[test]
    fn round_trip() {
        let e = Encoder::new(256);
        let v: Vec<f64> = (0..128).map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0).collect();
        let scale = 2f64.powi(40);
        let c = e.encode(&v, 128, scale, 100).unwrap();
        let back = e.decode(&c.iter().map(|&x| x as f64).collect::<Vec<_>>(), scale, 128);
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 2f64.powi(-30));
        }
    }

    #[test]
    fn automorphism_rotates_left() {
        let n = 32;
        let e = Encoder::new(n);
        let v: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let c = e.encode(&v, 16, 2f64.powi(30), 60).unwrap();
        let g = e.galois_element(3);
        let mut rotated = vec![0.0; n];
        for (k, &x) in c.iter().enumerate() {
            let t = k * g % (2 * n);
            if t < n {
                rotated[t] += x as f64;
            } else {
                rotated[t - n] -= x as f64;
            }
        }
        let back = e.decode(&rotated, 2f64.powi(30), 16);
        for j in 0..16 {
            assert!((back[j] - v[(j + 3) % 16]).abs() < 1e-6);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let e = Encoder::new(16);
        assert_eq!(e.encode(&[1e6], 1, 2f64.powi(40), 50).unwrap_err(), Error::Overflow);
        assert!(e.encode(&[0.0; 9], 8, 1.0, 50).is_err());
    }
}
