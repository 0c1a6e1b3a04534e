//! The round loop: re-clustering, leader election, asynchronous intra-cluster
//! windows, encrypted inter-cluster aggregation and ledger upkeep.

use std::collections::BTreeMap;

use ofl_core::intra::apply_download;
use ofl_core::privacy::{prepare_upload, UploadConfig};
use ofl_core::rng::Stream;
use ofl_core::trainer::{evaluate, local_step};
use ofl_core::{
    build_download, fraction_count, seed_rng, solve_rates, ClientStatusReport, DeviceProfile, DeviceType, LeaderState,
    ModelState, ParameterVector, PrivacyBudget, ResourceKind, StatusLedger, SyntheticTask, TrainConfig,
};
use ofl_secureagg::{
    inter_aggregate, manhattan, score_leaders, AggregateOutcome, AuditLog, DecryptionEvent, Decryptor, DftPlan,
};
use ofl_thfhe::{HeBackend, MockBackend, ThFhe, ThFheParams};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cluster::{recluster, ClusterAssignment};
use crate::config::{BackendKind, Protocol, SimulationConfig};
use crate::devices::{profiles, resource_profile, COMP_COST_PER_PARAM};
use crate::error::Result;
use crate::leader::elect_leader;
use crate::metrics::RoundMetrics;

#[derive(Debug, Clone)]
pub struct RunResult {
    pub metrics: Vec<RoundMetrics>,
    pub initial_global: Vec<f64>,
    pub global: Vec<f64>,
    pub device_types: Vec<DeviceType>,
    /// Rounds each client spent as a leader.
    pub leader_rounds: Vec<u64>,
    pub audit: Vec<DecryptionEvent>,
}

impl RunResult {
    pub fn final_accuracy(&self) -> f64 {
        self.metrics.last().map_or(0.0, |m| m.accuracy)
    }

    pub fn total_bytes_up(&self) -> usize {
        self.metrics.iter().map(|m| m.total_bytes_up()).sum()
    }

    pub fn total_bytes_down(&self) -> usize {
        self.metrics.iter().map(|m| m.total_bytes_down()).sum()
    }
}

/// Validates the config and runs the configured protocol and backend.
pub fn run(cfg: &SimulationConfig) -> Result<RunResult> {
    cfg.validate()?;
    match (cfg.protocol, cfg.backend) {
        (Protocol::Fedavg, _) => crate::baseline::run_fedavg(cfg),
        (Protocol::Ofl, BackendKind::Mock) => run_with(cfg, MockBackend::desk(1)),
        (Protocol::Ofl, BackendKind::Real) => {
            let plan = DftPlan::<f64>::forward(cfg.model_len())?;
            let mut rng = seed_rng(cfg.seed, "fhe/keygen");
            let he = ThFhe::new(ThFheParams::desk(), 1, &plan.rotations(), &mut rng)?;
            run_with(cfg, he)
        }
    }
}

/// State shared by every protocol: data, device profiles, initial models and
/// the availability process.
pub(crate) struct World {
    pub profiles: Vec<DeviceProfile>,
    pub tasks: Vec<SyntheticTask<f64>>,
    pub test: SyntheticTask<f64>,
    pub global: ParameterVector<f64>,
    pub models: Vec<ModelState<f64>>,
    pub train_rngs: Vec<Stream>,
    avail_rng: Stream,
}

fn gaussian(len: usize, rng: &mut Stream) -> Result<ParameterVector<f64>> {
    Ok(ParameterVector::new((0..len).map(|_| StandardNormal.sample(rng)).collect())?)
}

impl World {
    pub fn new(cfg: &SimulationConfig) -> Result<Self> {
        let len = cfg.model_len();
        let (tasks, test) = cfg.task.generate::<f64>(cfg.clients, cfg.task_seed())?;
        let models = (0..cfg.clients)
            .map(|i| Ok(ModelState::new(gaussian(len, &mut seed_rng(cfg.seed, &format!("init/client/{i}")))?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            profiles: profiles(cfg)?,
            tasks,
            test,
            global: gaussian(len, &mut seed_rng(cfg.seed, "init/global"))?,
            models,
            train_rngs: (0..cfg.clients).map(|i| seed_rng(cfg.seed, &format!("train/{i}"))).collect(),
            avail_rng: seed_rng(cfg.seed, "avail"),
        })
    }

    /// One independent Bernoulli draw per client, in id order.
    pub fn draw_availability(&mut self) -> Vec<bool> {
        let rng = &mut self.avail_rng;
        self.profiles.iter().map(|p| rng.random_bool(p.availability_probability)).collect()
    }

    pub fn evaluate_global(&self) -> Result<(f64, f64)> {
        Ok(evaluate(&self.global, &self.test)?)
    }
}

pub(crate) fn train_config(cfg: &SimulationConfig) -> TrainConfig<f64> {
    TrainConfig {
        learning_rate: cfg.learning_rate,
        local_iterations: cfg.t_lt,
        batch_size: cfg.batch_size,
        clip: cfg.clip,
    }
}

/// Busy time of a client that trains `up` parameters for `T_lt` iterations and
/// moves `up + down` values.
pub fn client_seconds(dev: &DeviceProfile, t_lt: usize, up: usize, down: usize) -> f64 {
    let compute = (t_lt * up + down) as f64 * COMP_COST_PER_PARAM / dev.relative_compute_speed;
    compute + (up + down) as f64 / dev.bandwidth
}

fn status_report(
    cfg: &SimulationConfig,
    client: usize,
    dev: &DeviceProfile,
    energy: f64,
    m: &ModelState<f64>,
    round: u64,
    available: bool,
) -> Result<ClientStatusReport<f64>> {
    let profile = resource_profile(dev, energy, cfg)?;
    let residual_limits: BTreeMap<ResourceKind, f64> = profile.limits().clone();
    let drift = m.current().as_slice().iter().zip(m.last_sync().as_slice());
    let update_norm = drift.map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let staleness = m.staleness(round);
    let mean_staleness = staleness.iter().sum::<u64>() as f64 / staleness.len().max(1) as f64;
    Ok(ClientStatusReport {
        client_id: client,
        round,
        residual_limits,
        availability_flag: available,
        model_summary: vec![update_norm, mean_staleness],
    })
}

/// Runs the clustered protocol on a given homomorphic backend.
pub fn run_with<B: HeBackend>(cfg: &SimulationConfig, mut backend: B) -> Result<RunResult> {
    cfg.validate()?;
    let len = cfg.model_len();
    let n = cfg.clients;
    let mut world = World::new(cfg)?;
    let initial_global = world.global.as_slice().to_vec();
    let plan = DftPlan::<f64>::forward(len)?;
    let train_cfg = train_config(cfg);
    let upload_cfg =
        UploadConfig { epsilon_select: cfg.epsilon_select, epsilon_perturb: cfg.epsilon_perturb, k_dp: cfg.k_dp };
    let all: Vec<usize> = (0..n).collect();
    let k = cfg.cluster_count();

    let mut cluster_rng = seed_rng(cfg.seed, "cluster");
    let mut fhe_rng = seed_rng(cfg.seed, "fhe");
    let mut dropout_rng = seed_rng(cfg.seed, "dropout");
    let mut attack_rng = seed_rng(cfg.seed, "attack");
    let mut dp_rngs: Vec<Stream> = (0..n).map(|i| seed_rng(cfg.seed, &format!("dp/{i}"))).collect();
    let mut audit = match &cfg.audit_log {
        Some(p) => AuditLog::with_file(p)?,
        None => AuditLog::new(),
    };

    let mut energy = vec![1.0f64; n];
    let mut active_sets: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut privacy = vec![0.0f64; n];
    let mut leader_rounds = vec![0u64; n];
    let mut elapsed = 0.0;
    let mut ledger = StatusLedger::new();
    for c in 0..n {
        ledger.append(status_report(cfg, c, &world.profiles[c], 1.0, &world.models[c], 0, true)?)?;
    }
    let mut assignment = ClusterAssignment { clusters: Vec::new() };
    // Each cluster's running leader model lives until the next re-clustering and
    // passes between leaders; members sync against the global model.
    let mut cluster_models: Vec<ParameterVector<f64>> = Vec::new();
    let mut metrics = Vec::with_capacity(cfg.t_max as usize);

    for t in 0..cfg.t_max {
        let reclustered = t % cfg.t_rc == 0;
        if reclustered {
            assignment = recluster(&ledger, &all, k, &cfg.features, cfg.kmeans_restarts, &mut cluster_rng);
            cluster_models = vec![world.global.clone(); assignment.len()];
        }
        let round = t + 1;
        let available = world.draw_availability();
        let global_prev = world.global.clone();

        let mut bytes_up = vec![0usize; n];
        let mut bytes_down = vec![0usize; n];
        let mut uploaded = vec![0usize; n];
        let mut gamma_up = vec![0.0f64; n];
        let mut seconds = vec![0.0f64; n];
        let mut leaders = Vec::new();
        let mut leader_models: Vec<Vec<f64>> = Vec::new();

        let serving = LeaderState::new(global_prev.clone(), 1);
        for (ci, cluster) in assignment.clusters.iter().enumerate() {
            let candidates: Vec<usize> = cluster.iter().copied().filter(|&c| available[c]).collect();
            let Some(leader) = elect_leader(&candidates, &ledger, &cfg.capability) else {
                continue;
            };
            let mut state = LeaderState::new(cluster_models[ci].clone(), cluster.len());
            let mut arrivals = Vec::with_capacity(candidates.len());
            for &c in &candidates {
                let dev = &world.profiles[c];
                let rates = solve_rates(&resource_profile(dev, energy[c], cfg)?, len, round)
                    .capped(cfg.gamma_up_cap, cfg.gamma_down_cap);
                let up = fraction_count(rates.gamma_up, len);
                gamma_up[c] = rates.gamma_up;

                let (req, values) = build_download(&serving, c, &world.models[c], &rates)?;
                apply_download(&mut world.models[c], &req, &values, round, true)?;
                let down = req.requested_indices.len();
                if c != leader {
                    bytes_down[c] = req.wire_bytes(len);
                }
                seconds[c] = client_seconds(dev, cfg.t_lt, up, down);
                if up == 0 {
                    continue;
                }

                if active_sets[c].len() != up {
                    let mut fresh = sample(&mut dp_rngs[c], len, up).into_vec();
                    fresh.sort_unstable();
                    active_sets[c] = fresh;
                }
                for _ in 0..cfg.t_lt {
                    local_step(
                        &mut world.models[c],
                        &world.tasks[c],
                        &train_cfg,
                        &active_sets[c],
                        &mut world.train_rngs[c],
                    )?;
                }
                let update = prepare_upload(&world.models[c], up, &upload_cfg, c, round, &mut dp_rngs[c])?;
                let mut next = update.indices.clone();
                next.sort_unstable();
                active_sets[c] = next;
                let budget = PrivacyBudget::for_round(cfg.epsilon_select, cfg.epsilon_perturb, rates.gamma_up, len)?;
                privacy[c] += budget.spent_for(up);
                uploaded[c] = up;
                if c != leader {
                    bytes_up[c] = update.wire_bytes(len);
                }
                arrivals.push((seconds[c], c, update));
            }
            // The leader's mailbox is FIFO in simulated arrival time.
            arrivals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (_, _, update) in &arrivals {
                state.leader_accumulate(update, None)?;
            }
            cluster_models[ci] = state.leader_model.clone();
            let mut model = state.leader_model.into_inner();
            if let Some(attack) = &cfg.attack {
                if attack.active(leader, round) {
                    attack.apply(&mut model, global_prev.as_slice(), &mut attack_rng);
                }
            }
            leaders.push(leader);
            leader_models.push(model);
        }

        let mut s_factors = Vec::new();
        let mut aborted = false;
        let mut fhe_bytes_up = 0;
        let mut fhe_ops = 0;
        if !leaders.is_empty() {
            backend.reshare(leaders.len(), &mut fhe_rng)?;
            let before = backend.counts();
            let cts = leader_models
                .iter()
                .map(|m| backend.encrypt(m, &mut fhe_rng))
                .collect::<ofl_thfhe::Result<Vec<_>>>()?;
            fhe_bytes_up = cts.iter().map(|c| backend.ct_to_bytes(c).len()).sum();
            let distances = leader_models
                .iter()
                .map(|m| manhattan(m, global_prev.as_slice()))
                .collect::<ofl_secureagg::Result<Vec<f64>>>()?;
            let responding: Vec<bool> =
                leaders.iter().map(|_| !dropout_rng.random_bool(cfg.dropout_probability)).collect();
            let mut d = Decryptor { round, responding: &responding, audit: &mut audit, rng: &mut fhe_rng };
            match score_leaders(&backend, &plan, &cts, &distances, &mut d) {
                Ok(scores) => {
                    s_factors = scores.iter().map(|s| s.s_factor).collect();
                    match inter_aggregate(&backend, &cts, &s_factors, &mut d)? {
                        AggregateOutcome::Completed { model, .. } => {
                            world.global = ParameterVector::new(model[..len].to_vec())?;
                        }
                        AggregateOutcome::Aborted { .. } => aborted = true,
                    }
                }
                Err(ofl_secureagg::Error::Dropout { .. }) => aborted = true,
                Err(e) => return Err(e.into()),
            }
            fhe_ops = backend.counts().since(&before).server_side();
        }

        for c in 0..n {
            if leaders.contains(&c) {
                leader_rounds[c] += 1;
                energy[c] = (energy[c] - cfg.leader_drain).max(0.0);
            } else {
                energy[c] = (energy[c] + cfg.recharge).min(1.0);
            }
            ledger.append(status_report(
                cfg,
                c,
                &world.profiles[c],
                energy[c],
                &world.models[c],
                round,
                available[c],
            )?)?;
        }

        let busiest = seconds.iter().copied().fold(0.0, f64::max);
        elapsed += busiest + fhe_ops as f64 * cfg.op_seconds;
        let (loss, accuracy) = world.evaluate_global()?;
        metrics.push(RoundMetrics {
            round,
            accuracy,
            loss,
            leaders,
            s_factors,
            cluster_hash: assignment.digest(),
            reclustered,
            aborted,
            available,
            bytes_up,
            bytes_down,
            fhe_bytes_up,
            uploads: uploaded.iter().filter(|&&u| u > 0).count(),
            uploaded_values: uploaded,
            gamma_up,
            privacy_spent: privacy.clone(),
            client_seconds: seconds,
            elapsed,
            fhe_ops,
        });
    }

    Ok(RunResult {
        metrics,
        initial_global,
        global: world.global.into_inner(),
        device_types: cfg.device_types(),
        leader_rounds,
        audit: audit.events().to_vec(),
    })
}
