//! Append-only record of every threshold decryption.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// What a decryption revealed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarKind {
    /// Real part of a leader's masked high band.
    HighFreqRe,
    /// Imaginary part of a leader's masked high band.
    HighFreqIm,
    /// A leader's Manhattan distance to the previous global model.
    Distance,
    /// The aggregated global model.
    GlobalModel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecryptionEvent {
    pub round: u64,
    pub session: u64,
    pub kind: ScalarKind,
    /// Leader the value belongs to; `None` for the global model.
    pub leader: Option<usize>,
}

#[derive(Debug, Default)]
pub struct AuditLog {
    events: Vec<DecryptionEvent>,
    sink: Option<File>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Also appends each event as one JSON line to `path`.
    pub fn with_file(path: &Path) -> Result<Self> {
        let sink = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { events: Vec::new(), sink: Some(sink) })
    }

    pub fn record(&mut self, event: DecryptionEvent) -> Result<()> {
        if let Some(f) = &mut self.sink {
            let line = serde_json::to_string(&event).expect("event serializes");
            writeln!(f, "{line}")?;
        }
        self.events.push(event);
        Ok(())
    }

    pub fn events(&self) -> &[DecryptionEvent] {
        &self.events
    }

    pub fn to_jsonl(&self) -> String {
        self.events.iter().map(|e| serde_json::to_string(e).expect("event serializes") + "\n").collect()
    }

    pub fn read_jsonl(path: &Path) -> Result<Vec<DecryptionEvent>> {
        let mut out = Vec::new();
        for line in BufReader::new(File::open(path)?).lines() {
            let line = line?;
            if !line.trim().is_empty() {
                out.push(serde_json::from_str(&line).map_err(std::io::Error::other)?);
            }
        }
        Ok(out)
    }
}
