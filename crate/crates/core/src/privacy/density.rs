use crate::error::{invalid, Result};
use crate::scalar::Scalar;

const FLOOR: f64 = 1e-6;
// Kernel mass beyond this many bandwidths is below 1e-13 and is skipped.
const CUTOFF: f64 = 8.0;

/// Gaussian kernel density of each entry over the empirical distribution of all
/// entries, max-min rescaled and clamped into `[1e-6, 1 − 1e-6]`.
///
/// If every entry has the same density (e.g. all values equal) each one is the
/// mode and maps to `1 − 1e-6`.
pub fn density_estimate<T: Scalar>(v: &[T], bandwidth: T) -> Result<Vec<T>> {
    if v.is_empty() {
        return Err(invalid("v", "needs at least one entry"));
    }
    if !(bandwidth > T::zero()) || !bandwidth.is_finite() {
        return Err(invalid("bandwidth", "must be positive"));
    }
    let h = bandwidth.as_f64();
    let mut order: Vec<(f64, usize)> = v.iter().enumerate().map(|(i, x)| (x.as_f64(), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    let reach = CUTOFF * h;
    let mut raw = vec![0.0f64; v.len()];
    let mut lo = 0;
    let mut hi = 0;
    for &(x, idx) in &order {
        while order[lo].0 < x - reach {
            lo += 1;
        }
        while hi < order.len() && order[hi].0 <= x + reach {
            hi += 1;
        }
        raw[idx] = order[lo..hi]
            .iter()
            .map(|&(y, _)| {
                let z = (x - y) / h;
                (-0.5 * z * z).exp()
            })
            .sum();
    }

    let (min, max) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let spread = max - min;
    Ok(raw
        .iter()
        .map(|&r| {
            let scaled = if spread <= 1e-12 * max { 1.0 } else { (r - min) / spread };
            T::lit(scaled.clamp(FLOOR, 1.0 - FLOOR))
        })
        .collect())
}

/// Silverman's robust rule of thumb, `0.9·min(σ, IQR/1.34)·n^(−1/5)`.
///
/// A zero IQR falls back to σ alone; constant input falls back to 1.
pub fn silverman_bandwidth<T: Scalar>(v: &[T]) -> T {
    if v.len() < 2 {
        return T::one();
    }
    let mut xs: Vec<f64> = v.iter().map(|x| x.as_f64()).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let quantile = |q: f64| {
        let pos = q * (n - 1.0);
        let (lo, frac) = (pos.floor() as usize, pos.fract());
        xs[lo] + frac * (xs[(lo + 1).min(xs.len() - 1)] - xs[lo])
    };
    let iqr = (quantile(0.75) - quantile(0.25)) / 1.34;
    let spread = if iqr > 0.0 { sd.min(iqr) } else { sd };
    if spread <= 1e-300 {
        T::one()
    } else {
        T::lit(0.9 * spread * n.powf(-0.2))
    }
}
