use rand::Rng;
use serde::{Deserialize, Serialize};

use super::density::silverman_bandwidth;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Density clusters over a set of selected values.
///
/// `clusters[c]` holds positions into the value slice that was clustered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ParameterClusterSet<T: Scalar> {
    pub clusters: Vec<Vec<usize>>,
    pub centroids: Vec<T>,
    /// `2 · max |θ − ω|` within each cluster.
    pub sensitivities: Vec<T>,
}

impl<T: Scalar> ParameterClusterSet<T> {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

fn kernel_sum(values: &[f64], x: f64, h: f64) -> f64 {
    values
        .iter()
        .map(|&y| {
            let z = (x - y) / h;
            (-0.5 * z * z).exp()
        })
        .sum()
}

/// Splits values into `k` contiguous value ranges at the density valleys.
///
/// The candidate cuts are the gaps between consecutive distinct values. The
/// `k − 1` gaps whose midpoint has the lowest kernel density are cut; ties go to
/// the wider gap, then to the lower one. `k` is reduced to the distinct count.
pub fn kde_clusters<T: Scalar>(values: &[T], k: usize) -> Result<ParameterClusterSet<T>> {
    if k == 0 {
        return Err(invalid("k_dp", "must be at least 1"));
    }
    if values.is_empty() {
        return Ok(ParameterClusterSet { clusters: Vec::new(), centroids: Vec::new(), sensitivities: Vec::new() });
    }
    let raw: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
    let mut distinct = raw.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let k = k.min(distinct.len());
    let h = silverman_bandwidth(&raw);

    struct Gap {
        at: usize,
        width: f64,
        density: f64,
    }
    let mut gaps: Vec<Gap> = distinct
        .windows(2)
        .enumerate()
        .map(|(at, w)| Gap { at, width: w[1] - w[0], density: kernel_sum(&raw, 0.5 * (w[0] + w[1]), h) })
        .collect();
    gaps.sort_by(|a, b| a.density.total_cmp(&b.density).then(b.width.total_cmp(&a.width)).then(a.at.cmp(&b.at)));
    // Upper edges (inclusive) of each cluster's value range.
    let mut uppers: Vec<f64> = gaps[..k - 1].iter().map(|g| distinct[g.at]).collect();
    uppers.sort_by(f64::total_cmp);

    let mut clusters = vec![Vec::new(); k];
    for (pos, &v) in raw.iter().enumerate() {
        let c = uppers.partition_point(|&u| u < v);
        clusters[c].push(pos);
    }

    let mut centroids = Vec::with_capacity(k);
    let mut sensitivities = Vec::with_capacity(k);
    for members in &clusters {
        let mean = members.iter().map(|&p| raw[p]).sum::<f64>() / members.len() as f64;
        let spread = members.iter().map(|&p| (raw[p] - mean).abs()).fold(0.0, f64::max);
        centroids.push(T::lit(mean));
        sensitivities.push(T::lit(2.0 * spread));
    }
    Ok(ParameterClusterSet { clusters, centroids, sensitivities })
}

/// One Laplace(0, scale) draw by inverse CDF. Always consumes one uniform so the
/// stream position does not depend on the scale.
pub fn sample_laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    if scale == 0.0 {
        return 0.0;
    }
    let tail = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
    -scale * u.signum() * tail.ln()
}

/// Adds Laplace noise of scale `k·Δ_PC/ε₂` to each value, where `k` is the
/// effective cluster count and Δ_PC the sensitivity of the value's cluster.
pub fn perturb_selected<T: Scalar, R: Rng + ?Sized>(
    values: &[T],
    k_dp: usize,
    eps2: T,
    rng: &mut R,
) -> Result<(Vec<T>, ParameterClusterSet<T>)> {
    if !(eps2 > T::zero()) {
        return Err(invalid("eps2", "must be positive"));
    }
    let set = kde_clusters(values, k_dp)?;
    let k = set.len() as f64;
    let mut out = values.to_vec();
    let mut scale_of = vec![0.0; values.len()];
    for (members, sens) in set.clusters.iter().zip(&set.sensitivities) {
        for &p in members {
            scale_of[p] = k * sens.as_f64() / eps2.as_f64();
        }
    }
    for (v, scale) in out.iter_mut().zip(scale_of) {
        *v += T::lit(sample_laplace(scale, rng));
    }
    Ok((out, set))
}
