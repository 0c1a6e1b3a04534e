//! Leader-side asynchronous aggregation inside one cluster.
//!
//! Uploads are folded in as a sparse running average with weight `1/|C|`, so
//! the leader model stays a convex combination of what it has seen. Downloads
//! serve the stalest indices first.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelState, ParameterVector};
use crate::planner::RatePlan;
use crate::privacy::SelectedUpdate;
use crate::scalar::{fraction_count, Scalar};
use crate::status::ClientStatusReport;

/// An update the leader refused, kept for the round log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedUpdate {
    pub sender: usize,
    pub round: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LeaderState<T: Scalar> {
    pub leader_model: ParameterVector<T>,
    pub member_count: usize,
    /// Round → (client, index count) in arrival order.
    pub contribution_log: BTreeMap<u64, Vec<(usize, usize)>>,
    pub status_cache: Vec<ClientStatusReport<T>>,
    pub rejected: Vec<RejectedUpdate>,
}

impl<T: Scalar> LeaderState<T> {
    /// Starts a cluster from the latest global model.
    pub fn new(global: ParameterVector<T>, member_count: usize) -> Self {
        Self {
            leader_model: global,
            member_count: member_count.max(1),
            contribution_log: BTreeMap::new(),
            status_cache: Vec::new(),
            rejected: Vec::new(),
        }
    }

    /// Folds one update: `θ̄[j] ← θ̄[j] + (v_j − θ̄[j]) / |C|` at the update's indices.
    ///
    /// An invalid update is rejected whole and recorded in [`Self::rejected`].
    pub fn leader_accumulate(&mut self, upd: &SelectedUpdate<T>, report: Option<ClientStatusReport<T>>) -> Result<()> {
        if let Err(e) = upd.validate(self.leader_model.len()) {
            self.rejected.push(RejectedUpdate { sender: upd.sender, round: upd.round, reason: e.to_string() });
            return Err(e);
        }
        let weight = T::one() / T::from_usize(self.member_count).unwrap();
        self.leader_model.try_map_in_place(|theta| {
            for (&j, &v) in upd.indices.iter().zip(&upd.values) {
                theta[j] += weight * (v - theta[j]);
            }
        })?;
        self.contribution_log.entry(upd.round).or_default().push((upd.sender, upd.indices.len()));
        if let Some(r) = report {
            self.status_cache.push(r);
        }
        Ok(())
    }
}

/// Indices a client will receive, stalest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DownloadRequest {
    pub client_id: usize,
    pub requested_indices: Vec<usize>,
    pub budget: usize,
}

impl DownloadRequest {
    /// Wire size of the served values; see [`crate::codec::sparse_wire_bytes`].
    pub fn wire_bytes(&self, model_len: usize) -> usize {
        crate::codec::sparse_wire_bytes(self.requested_indices.len(), model_len)
    }
}

/// Picks the `⌈γ_down·|θ|⌉` stalest indices (ties to the lower index) and the
/// leader values to serve at them.
pub fn build_download<T: Scalar>(
    state: &LeaderState<T>,
    client_id: usize,
    m: &ModelState<T>,
    plan: &RatePlan<T>,
) -> Result<(DownloadRequest, Vec<T>)> {
    let len = m.len();
    if state.leader_model.len() != len {
        return Err(Error::LengthMismatch { expected: state.leader_model.len(), actual: len });
    }
    let budget = fraction_count(plan.gamma_down, len);
    let staleness = m.staleness(plan.round);
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| staleness[b].cmp(&staleness[a]).then(a.cmp(&b)));
    order.truncate(budget);
    let values = order.iter().map(|&i| state.leader_model[i]).collect();
    Ok((DownloadRequest { client_id, requested_indices: order, budget }, values))
}

/// Client side of a download: overwrite, restamp, and rotate snapshots on global syncs.
pub fn apply_download<T: Scalar>(
    m: &mut ModelState<T>,
    req: &DownloadRequest,
    values: &[T],
    round: u64,
    global_sync: bool,
) -> Result<()> {
    m.apply_sync(&req.requested_indices, values, round, global_sync)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ParameterVector<f64> {
        ParameterVector::new(v.to_vec()).unwrap()
    }

    fn upd(indices: Vec<usize>, values: Vec<f64>) -> SelectedUpdate<f64> {
        SelectedUpdate { indices, values, sender: 1, round: 3 }
    }

    #[test]
    fn single_member_takes_upload() {
        let mut s = LeaderState::new(pv(&[0.0, 0.0]), 1);
        s.leader_accumulate(&upd(vec![0, 1], vec![2.0, -1.0]), None).unwrap();
        assert_eq!(s.leader_model.as_slice(), &[2.0, -1.0]);
        assert_eq!(s.contribution_log[&3], vec![(1, 2)]);
    }

    #[test]
    fn running_average_step() {
        let mut s = LeaderState::new(pv(&[0.0, 7.0]), 2);
        s.leader_accumulate(&upd(vec![0], vec![1.0]), None).unwrap();
        assert_eq!(s.leader_model.as_slice(), &[0.5, 7.0]);
        s.leader_accumulate(&upd(vec![1], vec![7.0]), None).unwrap();
        assert_eq!(s.leader_model[1], 7.0);
    }

    #[test]
    fn out_of_range_update_is_rejected_whole() {
        let mut s = LeaderState::new(pv(&[0.0, 0.0]), 1);
        assert!(s.leader_accumulate(&upd(vec![0, 2], vec![1.0, 1.0]), None).is_err());
        assert_eq!(s.leader_model.as_slice(), &[0.0, 0.0]);
        assert_eq!(s.rejected.len(), 1);
        assert!(s.contribution_log.is_empty());
    }

    #[test]
    fn download_orders_by_staleness() {
        let s = LeaderState::new(pv(&[10.0, 11.0, 12.0, 13.0]), 2);
        let m = ModelState::from_parts(pv(&[0.0; 4]), pv(&[0.0; 4]), pv(&[0.0; 4]), vec![5, 9, 1, 9], 0).unwrap();
        // staleness at round 10: (5, 1, 9, 1)
        let plan = RatePlan { gamma_up: 0.0, gamma_down: 0.5, round: 10 };
        let (req, vals) = build_download(&s, 4, &m, &plan).unwrap();
        assert_eq!(req.requested_indices, vec![2, 0]);
        assert_eq!(vals, vec![12.0, 10.0]);
        assert_eq!(req.wire_bytes(4), 9);

        let fresh = ModelState::new(pv(&[0.0; 4]));
        let (req, _) = build_download(&s, 4, &fresh, &plan).unwrap();
        assert_eq!(req.requested_indices, vec![0, 1]);
    }

    #[test]
    fn full_download_matches_leader() {
        let s = LeaderState::new(pv(&[1.0, 2.0]), 2);
        let mut m = ModelState::new(pv(&[0.0, 0.0]));
        let plan = RatePlan { gamma_up: 0.0, gamma_down: 1.0, round: 1 };
        let (req, vals) = build_download(&s, 0, &m, &plan).unwrap();
        apply_download(&mut m, &req, &vals, 1, true).unwrap();
        assert_eq!(m.current(), &s.leader_model);
        assert_eq!(m.last_sync(), &s.leader_model);
    }
}
