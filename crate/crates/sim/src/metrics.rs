use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One line of the metrics stream. Per-client vectors are indexed by client id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: u64,
    pub accuracy: f64,
    pub loss: f64,
    /// Leader ids, one per cluster with an available member, in cluster order.
    pub leaders: Vec<usize>,
    /// Sanitizing factor of each leader, aligned with `leaders`.
    pub s_factors: Vec<f64>,
    pub cluster_hash: String,
    pub reclustered: bool,
    /// The joint decryption was abandoned and the previous global kept.
    pub aborted: bool,
    /// Availability draw of each client this round.
    pub available: Vec<bool>,
    pub bytes_up: Vec<usize>,
    pub bytes_down: Vec<usize>,
    /// Ciphertext bytes leaders sent to the server.
    pub fhe_bytes_up: usize,
    pub uploaded_values: Vec<usize>,
    pub uploads: usize,
    pub gamma_up: Vec<f64>,
    /// Cumulative ε spent per client.
    pub privacy_spent: Vec<f64>,
    /// Simulated seconds each client was busy this round.
    pub client_seconds: Vec<f64>,
    /// Cumulative simulated time at the end of the round.
    pub elapsed: f64,
    /// Homomorphic operations executed by the server this round.
    pub fhe_ops: u64,
}

impl RoundMetrics {
    pub fn total_bytes_up(&self) -> usize {
        self.bytes_up.iter().sum()
    }

    pub fn total_bytes_down(&self) -> usize {
        self.bytes_down.iter().sum()
    }
}

pub fn to_jsonl(metrics: &[RoundMetrics]) -> String {
    let mut out = String::new();
    for m in metrics {
        out.push_str(&serde_json::to_string(m).expect("metrics serialize"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl(path: &Path, metrics: &[RoundMetrics]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(to_jsonl(metrics).as_bytes())?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<RoundMetrics>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e).into()))
        .collect()
}
