//! Reference protocols that share the data, initial models and availability
//! draws of a clustered run.

use ofl_core::codec::dense_wire_bytes;
use ofl_core::trainer::{evaluate, fedavg_reference, local_step};
use ofl_core::{seed_rng, ModelState, ParameterVector, SyntheticTask};

use crate::config::SimulationConfig;
use crate::engine::{client_seconds, train_config, RunResult, World};
use crate::error::Result;
use crate::metrics::RoundMetrics;

/// Full-sync federated averaging: every available client downloads the whole
/// global model, trains every parameter and uploads it densely; the server
/// averages by local data size.
pub fn run_fedavg(cfg: &SimulationConfig) -> Result<RunResult> {
    cfg.validate()?;
    let len = cfg.model_len();
    let n = cfg.clients;
    let mut world = World::new(cfg)?;
    let initial_global = world.global.as_slice().to_vec();
    let train_cfg = train_config(cfg);
    let everything: Vec<usize> = (0..len).collect();
    let mut elapsed = 0.0;
    let mut metrics = Vec::with_capacity(cfg.t_max as usize);

    for t in 0..cfg.t_max {
        let round = t + 1;
        let available = world.draw_availability();
        let mut bytes = vec![0usize; n];
        let mut uploaded = vec![0usize; n];
        let mut seconds = vec![0.0f64; n];
        let mut models = Vec::new();
        let mut weights = Vec::new();
        for c in (0..n).filter(|&c| available[c]) {
            let m = &mut world.models[c];
            m.apply_sync(&everything, world.global.as_slice(), round, true)?;
            for _ in 0..cfg.t_lt {
                local_step(m, &world.tasks[c], &train_cfg, &everything, &mut world.train_rngs[c])?;
            }
            models.push(m.current().clone());
            weights.push(world.tasks[c].len() as f64);
            bytes[c] = dense_wire_bytes(len);
            uploaded[c] = len;
            seconds[c] = client_seconds(&world.profiles[c], cfg.t_lt, len, len);
        }
        if !models.is_empty() {
            world.global = fedavg_reference(&models, &weights)?;
        }
        elapsed += seconds.iter().copied().fold(0.0, f64::max);
        let (loss, accuracy) = world.evaluate_global()?;
        metrics.push(RoundMetrics {
            round,
            accuracy,
            loss,
            leaders: Vec::new(),
            s_factors: Vec::new(),
            cluster_hash: String::new(),
            reclustered: false,
            aborted: false,
            bytes_up: bytes.clone(),
            bytes_down: bytes,
            fhe_bytes_up: 0,
            uploads: models.len(),
            uploaded_values: uploaded,
            gamma_up: available.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect(),
            available,
            privacy_spent: vec![0.0; n],
            client_seconds: seconds,
            elapsed,
            fhe_ops: 0,
        });
    }

    Ok(RunResult {
        metrics,
        initial_global,
        global: world.global.into_inner(),
        device_types: cfg.device_types(),
        leader_rounds: vec![0; n],
        audit: Vec::new(),
    })
}

/// Single-model training on the pooled client data from the run's initial
/// global model, `T_max · T_lt` full-batch-size steps. Returns `(loss, accuracy)`.
pub fn centralized(cfg: &SimulationConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let world = World::new(cfg)?;
    let pooled = SyntheticTask::pooled(&world.tasks)?;
    let len = cfg.model_len();
    let everything: Vec<usize> = (0..len).collect();
    let train_cfg = train_config(cfg);
    let mut m = ModelState::new(world.global.clone());
    // Same stream as client 0, so a one-client federation retraces this run.
    let mut rng = seed_rng(cfg.seed, "train/0");
    for _ in 0..cfg.t_max as usize * cfg.t_lt {
        local_step(&mut m, &pooled, &train_cfg, &everything, &mut rng)?;
    }
    let model: ParameterVector<f64> = m.current().clone();
    Ok(evaluate(&model, &world.test)?)
}
