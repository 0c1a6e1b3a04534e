//! Side-by-side comparison of two run directories.

use std::path::Path;

use ofl_sim::metrics::RoundMetrics;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::run::{read_run, SCHEMA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundDelta {
    pub round: u64,
    pub left: f64,
    pub right: f64,
    /// `right − left`, accuracy averaged over repeats.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub schema: u32,
    pub left: String,
    pub right: String,
    pub rounds: Vec<RoundDelta>,
    pub final_delta: f64,
    /// Client upload bytes, right over left.
    pub bytes_up_ratio: f64,
    /// Client upload plus download bytes, right over left.
    pub bytes_ratio: f64,
}

fn mean_accuracy(runs: &[Vec<RoundMetrics>], round: usize) -> f64 {
    runs.iter().map(|r| r[round].accuracy).sum::<f64>() / runs.len() as f64
}

fn totals(runs: &[Vec<RoundMetrics>]) -> (f64, f64) {
    let up: usize = runs.iter().flatten().map(RoundMetrics::total_bytes_up).sum();
    let down: usize = runs.iter().flatten().map(RoundMetrics::total_bytes_down).sum();
    (up as f64, down as f64)
}

pub fn compare(left: &Path, right: &Path) -> Result<Comparison> {
    let (lm, lr) = read_run(left)?;
    let (rm, rr) = read_run(right)?;
    if lm.repeats.len() != rm.repeats.len() {
        return Err(Error::Mismatch(format!("{} repeats vs {}", lm.repeats.len(), rm.repeats.len())));
    }
    for (i, (a, b)) in lm.repeats.iter().zip(&rm.repeats).enumerate() {
        if a.task_seed != b.task_seed {
            return Err(Error::Mismatch(format!("repeat {i} task seeds differ ({} vs {})", a.task_seed, b.task_seed)));
        }
    }
    if lm.rounds_per_repeat != rm.rounds_per_repeat {
        return Err(Error::Mismatch(format!("T_max {} vs {}", lm.rounds_per_repeat, rm.rounds_per_repeat)));
    }
    let rounds: Vec<RoundDelta> = (0..lm.rounds_per_repeat as usize)
        .map(|t| {
            let (l, r) = (mean_accuracy(&lr, t), mean_accuracy(&rr, t));
            RoundDelta { round: lr[0][t].round, left: l, right: r, delta: r - l }
        })
        .collect();
    let (lu, ld) = totals(&lr);
    let (ru, rd) = totals(&rr);
    Ok(Comparison {
        schema: SCHEMA,
        left: left.display().to_string(),
        right: right.display().to_string(),
        final_delta: rounds.last().map_or(0.0, |d| d.delta),
        rounds,
        bytes_up_ratio: ru / lu,
        bytes_ratio: (ru + rd) / (lu + ld),
    })
}

impl Comparison {
    /// Tab-separated table: a header, one row per round, then the ratios.
    pub fn table(&self) -> String {
        let mut s = String::from("round\tleft\tright\tdelta\n");
        for d in &self.rounds {
            s.push_str(&format!("{}\t{:.4}\t{:.4}\t{:+.4}\n", d.round, d.left, d.right, d.delta));
        }
        s.push_str(&format!("# final accuracy delta {:+.4}\n", self.final_delta));
        s.push_str(&format!("# upload bytes ratio {:.4}\n", self.bytes_up_ratio));
        s.push_str(&format!("# total bytes ratio {:.4}\n", self.bytes_ratio));
        s
    }
}
