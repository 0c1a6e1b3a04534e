//! The discrete Fourier transform as a product of three-diagonal stages.
//!
//! Every stage is `y = d0⊙x + dl⊙rot_left(x, h) + dr⊙rot_right(x, h)`, which maps
//! onto CMult, LeftRotate, RightRotate and Add. The forward plan is a
//! decimation-in-frequency radix-2 transform with `ω = e^{2πi/n}`: natural-order
//! input, bit-reversed output. The inverse plan runs decimation-in-time with
//! `ω^-1` from bit-reversed input back to natural order and folds in `1/n`.

use std::f64::consts::PI;

use num_complex::Complex;
use ofl_core::Scalar;
use ofl_thfhe::{HeBackend, Rotation};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DftStage<T> {
    pub shift: usize,
    pub diag0: Vec<Complex<T>>,
    pub diag_left: Vec<Complex<T>>,
    pub diag_right: Vec<Complex<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DftPlan<T> {
    size: usize,
    inverse: bool,
    stages: Vec<DftStage<T>>,
}

fn unit<T: Scalar>(turns: f64) -> Complex<T> {
    let a = 2.0 * PI * turns;
    Complex::new(T::lit(a.cos()), T::lit(a.sin()))
}

fn check_size(n: usize) -> Result<u32> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::BadSize(n));
    }
    Ok(n.trailing_zeros())
}

/// Reverses the low `bits` bits of `i`.
pub fn bit_reverse(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

impl<T: Scalar> DftPlan<T> {
    pub fn forward(n: usize) -> Result<Self> {
        let log = check_size(n)?;
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let stages = (0..log)
            .map(|s| {
                let h = n >> (s + 1);
                let block = 2 * h;
                let mut st =
                    DftStage { shift: h, diag0: vec![one; n], diag_left: vec![zero; n], diag_right: vec![zero; n] };
                for k in 0..n {
                    let j = k % block;
                    if j < h {
                        st.diag_left[k] = one;
                    } else {
                        let w = unit::<T>((j - h) as f64 / block as f64);
                        st.diag0[k] = -w;
                        st.diag_right[k] = w;
                    }
                }
                st
            })
            .collect();
        Ok(Self { size: n, inverse: false, stages })
    }

    pub fn inverse(n: usize) -> Result<Self> {
        let log = check_size(n)?;
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let mut stages: Vec<DftStage<T>> = (0..log)
            .map(|s| {
                let h = 1usize << s;
                let block = 2 * h;
                let mut st =
                    DftStage { shift: h, diag0: vec![one; n], diag_left: vec![zero; n], diag_right: vec![zero; n] };
                for k in 0..n {
                    let j = k % block;
                    if j < h {
                        st.diag_left[k] = unit::<T>(-(j as f64) / block as f64);
                    } else {
                        st.diag0[k] = -unit::<T>(-((j - h) as f64) / block as f64);
                        st.diag_right[k] = one;
                    }
                }
                st
            })
            .collect();
        let inv_n = T::lit(1.0 / n as f64);
        let last = stages.last_mut().expect("at least one stage");
        for d in [&mut last.diag0, &mut last.diag_left, &mut last.diag_right] {
            d.iter_mut().for_each(|c| *c = c.scale(inv_n));
        }
        Ok(Self { size: n, inverse: true, stages })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn stages(&self) -> &[DftStage<T>] {
        &self.stages
    }

    pub fn depth(&self) -> u32 {
        self.stages.len() as u32
    }

    /// Frequency bin held at output `position` (bit-reversed for the forward plan).
    pub fn bin_at(&self, position: usize) -> usize {
        if self.inverse {
            position
        } else {
            bit_reverse(position, self.size.trailing_zeros())
        }
    }

    /// Left shifts the encrypted evaluation needs keys for.
    pub fn rotations(&self) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.stages.iter().flat_map(|s| [s.shift % self.size, (self.size - s.shift) % self.size]).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Runs the stages on plaintext input.
    pub fn apply(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let n = self.size;
        if x.len() != n {
            return Err(Error::PlanMismatch { plan: n, period: x.len() });
        }
        let mut cur = x.to_vec();
        for st in &self.stages {
            cur = (0..n)
                .map(|k| {
                    st.diag0[k] * cur[k]
                        + st.diag_left[k] * cur[(k + st.shift) % n]
                        + st.diag_right[k] * cur[(k + n - st.shift) % n]
                })
                .collect();
        }
        Ok(cur)
    }

    /// Largest deviation of the staged transform from the direct `O(n²)` sum on `x`,
    /// after undoing the output permutation.
    pub fn self_test(&self, x: &[Complex<T>]) -> Result<f64> {
        let n = self.size;
        let got = self.apply(x)?;
        let sign = if self.inverse { -1.0 } else { 1.0 };
        let scale = if self.inverse { 1.0 / n as f64 } else { 1.0 };
        let log = n.trailing_zeros();
        let mut worst: f64 = 0.0;
        for (pos, g) in got.iter().enumerate() {
            let k = self.bin_at(pos);
            let mut acc = Complex::new(0.0, 0.0);
            for (j, v) in x.iter().enumerate() {
                // Inverse input arrives bit-reversed.
                let jj = if self.inverse { bit_reverse(j, log) } else { j };
                let a = sign * 2.0 * PI * ((jj * k) % n) as f64 / n as f64;
                acc += Complex::new(v.re.as_f64(), v.im.as_f64()) * Complex::new(a.cos(), a.sin());
            }
            acc *= scale;
            worst = worst.max((Complex::new(g.re.as_f64(), g.im.as_f64()) - acc).norm());
        }
        Ok(worst)
    }
}

/// Real and imaginary parts of an encrypted complex vector.
#[derive(Debug, Clone)]
pub struct EncryptedSpectrum<C> {
    pub re: C,
    pub im: C,
}

fn split<T: Scalar>(d: &[Complex<T>]) -> (Vec<f64>, Vec<f64>, bool, bool) {
    let re: Vec<f64> = d.iter().map(|c| c.re.as_f64()).collect();
    let im: Vec<f64> = d.iter().map(|c| c.im.as_f64()).collect();
    let re_nz = re.iter().any(|v| *v != 0.0);
    let im_nz = im.iter().any(|v| *v != 0.0);
    (re, im, re_nz, im_nz)
}

fn accumulate<B: HeBackend>(b: &B, acc: &mut Option<B::Ct>, term: B::Ct) -> Result<()> {
    *acc = Some(match acc.take() {
        None => term,
        Some(a) => b.add(&a, &term)?,
    });
    Ok(())
}

/// Evaluates `plan` on an encrypted vector whose imaginary part is `im` (zero when `None`).
///
/// Complex diagonals become pairs of real CMults, so each stage costs one level.
/// Capacity (period, depth, rotation keys) is checked before any work is done.
pub fn fhe_dft<B: HeBackend, T: Scalar>(
    b: &B,
    re: &B::Ct,
    im: Option<&B::Ct>,
    plan: &DftPlan<T>,
) -> Result<EncryptedSpectrum<B::Ct>> {
    let n = plan.size();
    let period = b.period(re);
    if period != n {
        return Err(Error::PlanMismatch { plan: n, period });
    }
    if let Some(im) = im {
        if b.period(im) != n || b.level(im) != b.level(re) {
            return Err(Error::PlanMismatch { plan: n, period: b.period(im) });
        }
    }
    if b.level(re) <= plan.depth() {
        return Err(Error::InsufficientLevels { needed: plan.depth(), available: b.level(re) });
    }
    for r in plan.rotations() {
        if r != 0 && !b.has_rotation(n, Rotation::Left(r)) {
            return Err(Error::MissingRotation(r));
        }
    }

    let mut cur_re = re.clone();
    let mut cur_im = im.cloned();
    for st in plan.stages() {
        let taps = [
            (&st.diag0, None),
            (&st.diag_left, Some(Rotation::Left(st.shift))),
            (&st.diag_right, Some(Rotation::Right(st.shift))),
        ];
        let mut next_re: Option<B::Ct> = None;
        let mut next_im: Option<B::Ct> = None;
        for (diag, rot) in taps {
            let (d_re, d_im, re_nz, im_nz) = split(diag);
            if !re_nz && !im_nz {
                continue;
            }
            let src_re = match rot {
                Some(r) => b.rotate(&cur_re, r)?,
                None => cur_re.clone(),
            };
            let src_im = match (&cur_im, rot) {
                (Some(c), Some(r)) => Some(b.rotate(c, r)?),
                (Some(c), None) => Some(c.clone()),
                (None, _) => None,
            };
            // (a + ib)(x + iy) = (ax − by) + i(ay + bx)
            if re_nz {
                accumulate(b, &mut next_re, b.cmult(&src_re, &d_re)?)?;
                if let Some(si) = &src_im {
                    accumulate(b, &mut next_im, b.cmult(si, &d_re)?)?;
                }
            }
            if im_nz {
                accumulate(b, &mut next_im, b.cmult(&src_re, &d_im)?)?;
                if let Some(si) = &src_im {
                    let neg: Vec<f64> = d_im.iter().map(|x| -x).collect();
                    accumulate(b, &mut next_re, b.cmult(si, &neg)?)?;
                }
            }
        }
        let zero = |c: &B::Ct| b.cmult(c, &[0.0]);
        let (r, i) = match (next_re, next_im) {
            (Some(r), Some(i)) => (r, i),
            (Some(r), None) => (r, zero(&cur_re)?),
            (None, Some(i)) => (zero(&cur_re)?, i),
            (None, None) => (zero(&cur_re)?, zero(&cur_re)?),
        };
        cur_re = r;
        cur_im = Some(i);
    }
    let im = cur_im.expect("at least one stage ran");
    Ok(EncryptedSpectrum { re: cur_re, im })
}
