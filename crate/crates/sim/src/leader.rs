use ofl_core::{ResourceKind, StatusLedger};

use crate::config::CapabilityWeights;

/// `CS[c]`: weighted residual compute and bandwidth, each divided by the largest
/// residual of that kind across the ledger.
pub fn capability_scores(ledger: &StatusLedger<f64>, candidates: &[usize], w: &CapabilityWeights) -> Vec<f64> {
    let max_of = |kind| ledger.clients().filter_map(|c| ledger.latest(c)).map(|r| r.residual(kind)).fold(0.0, f64::max);
    let (mc, mb) = (max_of(ResourceKind::Comp), max_of(ResourceKind::Comm));
    let norm = |v: f64, m: f64| if m > 0.0 { v / m } else { 0.0 };
    candidates
        .iter()
        .map(|&c| match ledger.latest(c) {
            Some(r) => {
                w.compute * norm(r.residual(ResourceKind::Comp), mc)
                    + w.bandwidth * norm(r.residual(ResourceKind::Comm), mb)
            }
            None => 0.0,
        })
        .collect()
}

/// Highest score wins; ties go to the lowest client id.
pub fn argmax_lowest_id(ids: &[usize], scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (&id, &s) in ids.iter().zip(scores) {
        best = match best {
            Some((bid, bs)) if s < bs || (s == bs && bid < id) => Some((bid, bs)),
            _ => Some((id, s)),
        };
    }
    best.map(|b| b.0)
}

pub fn elect_leader(candidates: &[usize], ledger: &StatusLedger<f64>, w: &CapabilityWeights) -> Option<usize> {
    argmax_lowest_id(candidates, &capability_scores(ledger, candidates, w))
}
