//! Repeated runs and their artifacts: `metrics.jsonl`, `manifest.json`, `summary.json`.

use std::path::{Path, PathBuf};

use ofl_core::rng::derive_seed;
use ofl_sim::metrics::{to_jsonl, RoundMetrics};
use ofl_sim::{run, BackendKind, Protocol, RunResult, SimulationConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA: u32 = 1;
pub const METRICS: &str = "metrics.jsonl";
pub const MANIFEST: &str = "manifest.json";
pub const SUMMARY: &str = "summary.json";

/// Everything needed to re-run an experiment bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub tool_version: String,
    pub preset: Option<String>,
    pub master_seed: u64,
    /// Lines of `metrics.jsonl` belonging to each repeat, in order.
    pub rounds_per_repeat: u64,
    pub repeats: Vec<RepeatEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatEntry {
    pub seed: u64,
    pub task_seed: u64,
    pub config: SimulationConfig,
    pub metrics_sha256: String,
}

/// Mean and sample standard deviation over repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub values: Vec<f64>,
}

impl Stat {
    pub fn of(values: Vec<f64>) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std, values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub protocol: Protocol,
    pub backend: BackendKind,
    pub repeats: usize,
    pub rounds: u64,
    pub final_accuracy: Stat,
    pub final_loss: Stat,
    pub bytes_up: Stat,
    pub bytes_down: Stat,
    pub fhe_bytes_up: Stat,
    pub simulated_seconds: Stat,
    pub aborted_rounds: Stat,
}

/// Repeat 0 keeps the master seed; later repeats derive theirs from it.
pub fn repeat_seed(master: u64, repeat: usize) -> u64 {
    if repeat == 0 {
        master
    } else {
        derive_seed(master, &format!("repeat/{repeat}"))
    }
}

fn repeat_config(base: &SimulationConfig, repeat: usize, repeats: usize) -> SimulationConfig {
    let mut cfg = base.clone();
    cfg.seed = repeat_seed(base.seed, repeat);
    if repeats > 1 {
        cfg.audit_log = cfg.audit_log.map(|p| suffixed(&p, repeat));
    }
    cfg
}

fn suffixed(path: &Path, repeat: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{repeat}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{repeat}"),
    };
    path.with_file_name(name)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs every config, at most `available_parallelism` at a time, keeping order.
fn run_all(configs: &[SimulationConfig]) -> Result<Vec<RunResult>> {
    let width = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut out = Vec::with_capacity(configs.len());
    for chunk in configs.chunks(width) {
        let results: Vec<_> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|c| s.spawn(move || run(c))).collect();
            handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
        });
        for r in results {
            out.push(r?);
        }
    }
    Ok(out)
}

pub struct Experiment {
    pub manifest: Manifest,
    pub summary: Summary,
    pub metrics: String,
}

pub fn execute(base: &SimulationConfig, repeats: usize, preset: Option<&str>) -> Result<Experiment> {
    if repeats == 0 {
        return Err(Error::Config("`repeat` must be at least 1".into()));
    }
    let configs: Vec<SimulationConfig> = (0..repeats).map(|i| repeat_config(base, i, repeats)).collect();
    let results = run_all(&configs)?;

    let mut metrics = String::new();
    let mut entries = Vec::with_capacity(repeats);
    for (cfg, r) in configs.iter().zip(&results) {
        let lines = to_jsonl(&r.metrics);
        entries.push(RepeatEntry {
            seed: cfg.seed,
            task_seed: cfg.task_seed(),
            config: cfg.clone(),
            metrics_sha256: sha256_hex(lines.as_bytes()),
        });
        metrics.push_str(&lines);
    }
    let stat = |f: &dyn Fn(&RunResult) -> f64| Stat::of(results.iter().map(f).collect());
    let summary = Summary {
        schema: SCHEMA,
        protocol: base.protocol,
        backend: base.backend,
        repeats,
        rounds: base.t_max,
        final_accuracy: stat(&|r| r.final_accuracy()),
        final_loss: stat(&|r| r.metrics.last().map_or(f64::NAN, |m| m.loss)),
        bytes_up: stat(&|r| r.total_bytes_up() as f64),
        bytes_down: stat(&|r| r.total_bytes_down() as f64),
        fhe_bytes_up: stat(&|r| r.metrics.iter().map(|m| m.fhe_bytes_up as f64).sum()),
        simulated_seconds: stat(&|r| r.metrics.last().map_or(0.0, |m| m.elapsed)),
        aborted_rounds: stat(&|r| r.metrics.iter().filter(|m| m.aborted).count() as f64),
    };
    let manifest = Manifest {
        schema: SCHEMA,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        preset: preset.map(str::to_string),
        master_seed: base.seed,
        rounds_per_repeat: base.t_max,
        repeats: entries,
    };
    Ok(Experiment { manifest, summary, metrics })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(Error::io(path))
}

pub fn write_artifacts(dir: &Path, e: &Experiment) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    write(&dir.join(METRICS), &e.metrics)?;
    write(&dir.join(MANIFEST), &(serde_json::to_string_pretty(&e.manifest).expect("manifest serializes") + "\n"))?;
    write(&dir.join(SUMMARY), &(serde_json::to_string_pretty(&e.summary).expect("summary serializes") + "\n"))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), reason: e.to_string() })
}

/// Accepts either a run directory or a path to its manifest.
pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let file = if path.is_dir() { path.join(MANIFEST) } else { path.to_path_buf() };
    read_json(&file)
}

/// The metrics of each repeat of a run directory.
pub fn read_run(dir: &Path) -> Result<(Manifest, Vec<Vec<RoundMetrics>>)> {
    let manifest = read_manifest(dir)?;
    let path = dir.join(METRICS);
    let text = std::fs::read_to_string(&path).map_err(Error::io(&path))?;
    let rows = text
        .lines()
        .map(serde_json::from_str)
        .collect::<std::result::Result<Vec<RoundMetrics>, _>>()
        .map_err(|e| Error::Parse { path: path.clone(), reason: e.to_string() })?;
    let per = manifest.rounds_per_repeat as usize;
    if rows.len() != per * manifest.repeats.len() {
        return Err(Error::Parse {
            path,
            reason: format!("{} lines, expected {} repeats of {per}", rows.len(), manifest.repeats.len()),
        });
    }
    let runs = rows.chunks(per.max(1)).map(<[RoundMetrics]>::to_vec).collect();
    Ok((manifest, runs))
}

/// Re-runs every repeat of a manifest and checks the metrics digests.
pub fn replay(manifest: &Manifest) -> Result<String> {
    let configs: Vec<SimulationConfig> = manifest.repeats.iter().map(|e| e.config.clone()).collect();
    let results = run_all(&configs)?;
    let mut metrics = String::new();
    for (i, (entry, r)) in manifest.repeats.iter().zip(&results).enumerate() {
        let lines = to_jsonl(&r.metrics);
        let digest = sha256_hex(lines.as_bytes());
        if digest != entry.metrics_sha256 {
            return Err(Error::Replay(format!("repeat {i}: sha256 {digest}, manifest has {}", entry.metrics_sha256)));
        }
        metrics.push_str(&lines);
    }
    Ok(metrics)
}
