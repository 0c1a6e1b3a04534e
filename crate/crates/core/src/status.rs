//! Client status reports and the append-only ledger the server clusters on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::resources::{ResourceKind, ResourceProfile};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ClientStatusReport<T: Scalar> {
    pub client_id: usize,
    pub round: u64,
    pub residual_limits: BTreeMap<ResourceKind, T>,
    pub availability_flag: bool,
    /// Small fixed-length model descriptor (update norm, mean staleness).
    pub model_summary: Vec<T>,
}

impl<T: Scalar> ClientStatusReport<T> {
    /// Checks that no residual exceeds the profile's limit for that resource.
    pub fn check_against(&self, profile: &ResourceProfile<T>) -> Result<()> {
        for (kind, residual) in &self.residual_limits {
            let limit =
                profile.limit(*kind).ok_or_else(|| invalid("residual_limits", format!("{kind} not in profile")))?;
            if *residual > limit {
                return Err(invalid("residual_limits", format!("{kind} residual {residual} exceeds limit {limit}")));
            }
        }
        Ok(())
    }

    pub fn residual(&self, kind: ResourceKind) -> T {
        self.residual_limits.get(&kind).copied().unwrap_or_else(T::zero)
    }
}

/// Per-client report history, strictly ordered by round.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StatusLedger<T: Scalar> {
    history: BTreeMap<usize, Vec<ClientStatusReport<T>>>,
}

impl<T: Scalar> StatusLedger<T> {
    pub fn new() -> Self {
        Self { history: BTreeMap::new() }
    }

    pub fn append(&mut self, report: ClientStatusReport<T>) -> Result<()> {
        let entry = self.history.entry(report.client_id).or_default();
        if let Some(last) = entry.last() {
            if report.round <= last.round {
                return Err(Error::OutOfOrderReport {
                    client: report.client_id,
                    round: report.round,
                    last: last.round,
                });
            }
        }
        entry.push(report);
        Ok(())
    }

    pub fn extend(&mut self, reports: impl IntoIterator<Item = ClientStatusReport<T>>) -> Result<()> {
        reports.into_iter().try_for_each(|r| self.append(r))
    }

    pub fn latest(&self, client: usize) -> Option<&ClientStatusReport<T>> {
        self.history.get(&client).and_then(|h| h.last())
    }

    pub fn history(&self, client: usize) -> &[ClientStatusReport<T>] {
        self.history.get(&client).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn clients(&self) -> impl Iterator<Item = usize> + '_ {
        self.history.keys().copied()
    }

    /// Fraction of reports in which the client was available; 0 with no history.
    pub fn availability_rate(&self, client: usize) -> f64 {
        let h = self.history(client);
        if h.is_empty() {
            return 0.0;
        }
        h.iter().filter(|r| r.availability_flag).count() as f64 / h.len() as f64
    }
}
