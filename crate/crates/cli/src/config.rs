//! Config layering: preset, then config file, then command-line flags.

use std::path::Path;

use ofl_sim::{BackendKind, SimulationConfig};
use toml::{Table, Value};

use crate::error::{Error, Result};

/// A named scenario: config overrides plus a default repeat count.
#[derive(Debug, Clone)]
pub struct ExperimentPreset {
    pub name: &'static str,
    pub overrides: &'static str,
    pub repeat: usize,
}

pub const PRESETS: &[ExperimentPreset] = &[
    ExperimentPreset { name: "smoke", overrides: "N = 4\nT_max = 10\nT_rc = 5\nbackend = \"mock\"", repeat: 1 },
    ExperimentPreset {
        name: "desk",
        overrides: "N = 16\nK = 4\nT_max = 200\ngamma_up_cap = 0.1\ngamma_down_cap = 0.1",
        repeat: 5,
    },
    ExperimentPreset {
        name: "rotation",
        overrides:
            "N = 16\nK = 2\nT_max = 200\n[features]\ncompute = 0.0\nbandwidth = 0.0\navailability = 0.0\nmodel = 1.0",
        repeat: 1,
    },
];

pub fn preset(name: &str) -> Result<&'static ExperimentPreset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        Error::Config(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}

/// Recursively overlays `top` onto `base`; tables merge, everything else replaces.
pub fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    text.parse::<Table>().map_err(|e| Error::Parse { path: path.to_path_buf(), reason: e.to_string() })
}

/// Flags that override the layered config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub backend: Option<BackendKind>,
}

pub fn resolve(preset: Option<&ExperimentPreset>, file: Option<&Path>, flags: &Overrides) -> Result<SimulationConfig> {
    let mut table = Table::new();
    if let Some(p) = preset {
        merge(&mut table, p.overrides.parse().expect("preset tables parse"));
    }
    if let Some(path) = file {
        merge(&mut table, read_table(path)?);
    }
    let mut cfg: SimulationConfig =
        Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if let Some(backend) = flags.backend {
        cfg.backend = backend;
    }
    cfg.validate()?;
    Ok(cfg)
}
