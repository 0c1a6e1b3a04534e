//! Scalarizing a leader's spectrum into one high-frequency energy.
//!
//! Squaring needs ciphertext multiplication, so the band is isolated under
//! encryption with a plaintext mask and only the masked coefficients are revealed.

use ofl_core::Scalar;
use ofl_thfhe::HeBackend;

use crate::audit::ScalarKind;
use crate::decrypt::{threshold_decrypt, Decryptor};
use crate::dft::{DftPlan, EncryptedSpectrum};
use crate::error::Result;

/// Bins `⌈n/4⌉ ..= n − ⌈n/4⌉`: the upper half of the one-sided spectrum and its mirror.
pub fn is_high_band(bin: usize, n: usize) -> bool {
    let q = n.div_ceil(4);
    bin >= q && bin <= n - q
}

/// 1 at output positions holding a high-band bin, 0 elsewhere.
pub fn band_mask<T: Scalar>(plan: &DftPlan<T>) -> Vec<f64> {
    let n = plan.size();
    (0..n).map(|p| if is_high_band(plan.bin_at(p), n) { 1.0 } else { 0.0 }).collect()
}

pub fn mask_band<B: HeBackend, T: Scalar>(
    b: &B,
    spectrum: &EncryptedSpectrum<B::Ct>,
    plan: &DftPlan<T>,
) -> Result<EncryptedSpectrum<B::Ct>> {
    let mask = band_mask(plan);
    Ok(EncryptedSpectrum { re: b.cmult(&spectrum.re, &mask)?, im: b.cmult(&spectrum.im, &mask)? })
}

/// `(1/n)·Σ |X_k|²` over the given coefficients.
pub fn band_energy(re: &[f64], im: &[f64], n: usize) -> f64 {
    re.iter().zip(im).map(|(a, b)| a * a + b * b).sum::<f64>() / n as f64
}

/// Masks the high band, threshold-decrypts it and returns its energy.
pub fn high_freq_magnitude<B: HeBackend, T: Scalar>(
    b: &B,
    spectrum: &EncryptedSpectrum<B::Ct>,
    plan: &DftPlan<T>,
    leader: usize,
    d: &mut Decryptor,
) -> Result<f64> {
    let band = mask_band(b, spectrum, plan)?;
    let re = threshold_decrypt(b, &band.re, ScalarKind::HighFreqRe, Some(leader), d)?;
    let im = threshold_decrypt(b, &band.im, ScalarKind::HighFreqIm, Some(leader), d)?;
    Ok(band_energy(&re, &im, plan.size()))
}
