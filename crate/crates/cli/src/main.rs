//! `ofl`: run simulations, replay manifests and compare runs.

mod compare;
mod config;
mod error;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ofl_sim::BackendKind;

use crate::config::{preset, resolve, Overrides};
use crate::error::{Error, Result};

#[derive(Parser)]
#[command(name = "ofl", version, about = "Opportunistic federated learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write metrics.jsonl, manifest.json and summary.json.
    Run(RunArgs),
    /// Compare two run directories round by round.
    Compare {
        left: PathBuf,
        right: PathBuf,
        /// Also write the comparison as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Re-run a manifest and check the metrics are byte-identical.
    Replay {
        /// A run directory or its manifest.json.
        manifest: PathBuf,
        /// Write the regenerated metrics here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; its keys override the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named scenario: smoke, desk or rotation.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    #[arg(long, default_value = "ofl-out")]
    out: PathBuf,
    /// Repeats with derived seeds; defaults to the preset's count or 1.
    #[arg(long)]
    repeat: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Mock,
    Real,
}

fn run_cmd(a: RunArgs) -> Result<()> {
    let p = a.preset.as_deref().map(preset).transpose()?;
    if p.is_none() && a.config.is_none() {
        return Err(Error::Config("missing field `N` (pass --config or --preset)".into()));
    }
    let flags = Overrides {
        seed: a.seed,
        backend: a.backend.map(|b| match b {
            Backend::Mock => BackendKind::Mock,
            Backend::Real => BackendKind::Real,
        }),
    };
    let cfg = resolve(p, a.config.as_deref(), &flags)?;
    let repeats = a.repeat.or(p.map(|p| p.repeat)).unwrap_or(1);
    let e = run::execute(&cfg, repeats, a.preset.as_deref())?;
    run::write_artifacts(&a.out, &e)?;
    if !a.quiet {
        let acc = &e.summary.final_accuracy;
        for (entry, v) in e.manifest.repeats.iter().zip(&acc.values) {
            println!("seed {:>20}  accuracy {:.2}%", entry.seed, 100.0 * v);
        }
        println!(
            "accuracy {:.2} ± {:.2} % over {} repeat(s); upload bytes {:.0}; wrote {}",
            100.0 * acc.mean,
            100.0 * acc.std,
            repeats,
            e.summary.bytes_up.mean,
            a.out.display()
        );
    }
    Ok(())
}

fn replay_cmd(path: &Path, out: Option<&Path>) -> Result<()> {
    let manifest = run::read_manifest(path)?;
    let metrics = run::replay(&manifest)?;
    if let Some(out) = out {
        std::fs::write(out, metrics).map_err(Error::io(out))?;
    }
    println!("replayed {} repeat(s): metrics identical", manifest.repeats.len());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => run_cmd(a),
        Command::Compare { left, right, out, quiet } => {
            let c = compare::compare(&left, &right)?;
            if let Some(path) = out {
                let json = serde_json::to_string_pretty(&c).expect("comparison serializes") + "\n";
                std::fs::write(&path, json).map_err(Error::io(&path))?;
            }
            if !quiet {
                print!("{}", c.table());
            }
            Ok(())
        }
        Command::Replay { manifest, out } => replay_cmd(&manifest, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ofl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
