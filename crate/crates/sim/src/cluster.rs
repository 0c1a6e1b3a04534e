//! Periodic k-means regrouping of clients on resource and model-state features.

use ofl_core::{ResourceKind, StatusLedger};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::FeatureWeights;

pub const KMEANS_ITERATIONS: usize = 50;
pub const KMEANS_TOLERANCE: f64 = 1e-6;

/// Disjoint clusters covering the clustered clients. Members are sorted and
/// clusters are ordered by their smallest member, so equal partitions compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub clusters: Vec<Vec<usize>>,
}

impl ClusterAssignment {
    pub fn from_labels(clients: &[usize], labels: &[usize]) -> Self {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut clusters = vec![Vec::new(); k];
        for (&c, &l) in clients.iter().zip(labels) {
            clusters[l].push(c);
        }
        clusters.retain(|c| !c.is_empty());
        clusters.iter_mut().for_each(|c| c.sort_unstable());
        clusters.sort_by_key(|c| c[0]);
        Self { clusters }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn cluster_of(&self, client: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.contains(&client))
    }

    /// Short stable digest of the partition for metric records.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for c in &self.clusters {
            for m in c {
                h.update((*m as u64).to_le_bytes());
            }
            h.update(u64::MAX.to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Per-client feature rows: residual compute, residual bandwidth, availability
/// rate and the model summary, each column max-min normalized and weighted.
pub fn client_features(ledger: &StatusLedger<f64>, clients: &[usize], w: &FeatureWeights) -> Vec<Vec<f64>> {
    let summary_len =
        clients.iter().filter_map(|&c| ledger.latest(c)).map(|r| r.model_summary.len()).max().unwrap_or(0);
    let mut rows: Vec<Vec<f64>> = clients
        .iter()
        .map(|&c| {
            let mut row = vec![0.0; 3 + summary_len];
            if let Some(r) = ledger.latest(c) {
                row[0] = r.residual(ResourceKind::Comp);
                row[1] = r.residual(ResourceKind::Comm);
                for (j, v) in r.model_summary.iter().enumerate() {
                    row[3 + j] = *v;
                }
            }
            row[2] = ledger.availability_rate(c);
            row
        })
        .collect();
    let width = 3 + summary_len;
    for j in 0..width {
        let weight = match j {
            0 => w.compute,
            1 => w.bandwidth,
            2 => w.availability,
            _ => w.model,
        };
        let lo = rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
        for r in rows.iter_mut() {
            r[j] = if hi > lo { weight * (r[j] - lo) / (hi - lo) } else { 0.0 };
        }
    }
    rows
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn seed_plus_plus<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    while centers.len() < k {
        let d: Vec<f64> = points.iter().map(|p| nearest(p, &centers).1).collect();
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let mut x = rng.random_range(0.0..total);
            let mut idx = d.len() - 1;
            for (i, di) in d.iter().enumerate() {
                if x < *di {
                    idx = i;
                    break;
                }
                x -= di;
            }
            idx
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[pick].clone());
    }
    centers
}

/// One k-means run: k-means++ seeding, Lloyd iterations, empty clusters refilled
/// with the point farthest from its centroid in the largest cluster.
/// Returns labels and inertia.
fn lloyd<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> (Vec<usize>, f64) {
    let dim = points[0].len();
    let mut centers = seed_plus_plus(points, k, rng);
    let mut labels = vec![0; points.len()];
    for _ in 0..KMEANS_ITERATIONS {
        for (i, p) in points.iter().enumerate() {
            labels[i] = nearest(p, &centers).0;
        }
        repair_empty(points, &mut labels, &centers, k);
        let mut next = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            next[l].iter_mut().zip(p).for_each(|(a, b)| *a += b);
        }
        for (c, n) in next.iter_mut().zip(&counts) {
            c.iter_mut().for_each(|v| *v /= *n as f64);
        }
        let shift = centers.iter().zip(&next).map(|(a, b)| dist2(a, b).sqrt()).fold(0.0, f64::max);
        centers = next;
        if shift < KMEANS_TOLERANCE {
            break;
        }
    }
    for (i, p) in points.iter().enumerate() {
        labels[i] = nearest(p, &centers).0;
    }
    repair_empty(points, &mut labels, &centers, k);
    let inertia = points.iter().zip(&labels).map(|(p, &l)| dist2(p, &centers[l])).sum();
    (labels, inertia)
}

fn repair_empty(points: &[Vec<f64>], labels: &mut [usize], centers: &[Vec<f64>], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        let Some(empty) = counts.iter().position(|&n| n == 0) else {
            return;
        };
        let largest = (0..k).max_by_key(|&i| (counts[i], std::cmp::Reverse(i))).expect("k > 0");
        let far = (0..points.len())
            .filter(|&i| labels[i] == largest)
            .max_by(|&a, &b| {
                dist2(&points[a], &centers[largest]).total_cmp(&dist2(&points[b], &centers[largest])).then(b.cmp(&a))
            })
            .expect("largest cluster is non-empty");
        labels[far] = empty;
    }
}

/// k-means with `restarts` seeded runs, keeping the lowest inertia (earliest on ties).
/// `k` is reduced to the number of points.
pub fn kmeans<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, restarts: usize, rng: &mut R) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let k = k.clamp(1, points.len());
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..restarts.max(1) {
        let (labels, inertia) = lloyd(points, k, rng);
        if best.as_ref().is_none_or(|b| inertia < b.1) {
            best = Some((labels, inertia));
        }
    }
    best.expect("at least one run").0
}

pub fn recluster<R: Rng + ?Sized>(
    ledger: &StatusLedger<f64>,
    clients: &[usize],
    k: usize,
    weights: &FeatureWeights,
    restarts: usize,
    rng: &mut R,
) -> ClusterAssignment {
    let points = client_features(ledger, clients, weights);
    let labels = kmeans(&points, k, restarts, rng);
    ClusterAssignment::from_labels(clients, &labels)
}
