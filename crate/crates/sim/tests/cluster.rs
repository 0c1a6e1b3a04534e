use std::collections::BTreeMap;

use ofl_core::{seed_rng, ClientStatusReport, DeviceType, ResourceKind, StatusLedger};
use ofl_sim::cluster::{kmeans, recluster, ClusterAssignment};
use ofl_sim::config::{CapabilityWeights, FeatureWeights, SimulationConfig};
use ofl_sim::devices::{preset, resource_profile};
use ofl_sim::elect_leader;
use rand::Rng;

fn report(client: usize, round: u64, comp: f64, comm: f64, avail: bool) -> ClientStatusReport<f64> {
    ClientStatusReport {
        client_id: client,
        round,
        residual_limits: BTreeMap::from([(ResourceKind::Comp, comp), (ResourceKind::Comm, comm)]),
        availability_flag: avail,
        model_summary: vec![0.0, 0.0],
    }
}

/// Adjusted Rand index from the pair-counting contingency table.
fn adjusted_rand(a: &[usize], b: &[usize]) -> f64 {
    let choose2 = |n: usize| (n * n.saturating_sub(1)) as f64 / 2.0;
    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&n| choose2(n)).sum();
    let ra: f64 = rows.values().map(|&n| choose2(n)).sum();
    let cb: f64 = cols.values().map(|&n| choose2(n)).sum();
    let expected = ra * cb / choose2(a.len());
    let max = (ra + cb) / 2.0;
    (index - expected) / (max - expected)
}

fn labels_of(assign: &ClusterAssignment, n: usize) -> Vec<usize> {
    (0..n).map(|c| assign.cluster_of(c).unwrap()).collect()
}

#[test]
fn adjusted_rand_oracle_sanity() {
    assert!((adjusted_rand(&[0, 0, 1, 1], &[5, 5, 2, 2]) - 1.0).abs() < 1e-12);
    assert!(adjusted_rand(&[0, 1, 0, 1], &[0, 0, 1, 1]) < 0.0);
}

#[test]
fn identical_features_are_deterministic() {
    let mut ledger = StatusLedger::new();
    for c in 0..9 {
        ledger.append(report(c, 0, 5.0, 5.0, true)).unwrap();
    }
    let clients: Vec<usize> = (0..9).collect();
    let run = || recluster(&ledger, &clients, 3, &FeatureWeights::default(), 4, &mut seed_rng(3, "cluster"));
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a.len(), 3, "empty clusters are repaired");
    let mut all: Vec<usize> = a.clusters.concat();
    all.sort_unstable();
    assert_eq!(all, clients);
}

#[test]
fn separated_blobs_are_recovered() {
    let mut rng = seed_rng(8, "blobs");
    let mut ledger = StatusLedger::new();
    for c in 0..10 {
        let (comp, comm) = if c % 2 == 0 { (10.0, 100.0) } else { (900.0, 5000.0) };
        ledger
            .append(report(c, 0, comp + rng.random_range(-1.0..1.0), comm + rng.random_range(-1.0..1.0), true))
            .unwrap();
    }
    let clients: Vec<usize> = (0..10).collect();
    let a = recluster(&ledger, &clients, 2, &FeatureWeights::default(), 4, &mut seed_rng(1, "cluster"));
    assert_eq!(a.clusters, vec![vec![0, 2, 4, 6, 8], vec![1, 3, 5, 7, 9]]);
}

#[test]
fn typed_clients_cluster_by_type() {
    let cfg = SimulationConfig::new(16);
    let types = cfg.device_types();
    let mut rng = seed_rng(5, "avail");
    let mut ledger = StatusLedger::new();
    for round in 0..20u64 {
        for (c, t) in types.iter().enumerate() {
            let dev = preset(*t).unwrap();
            let limits = resource_profile(&dev, 1.0, &cfg).unwrap().limits().clone();
            ledger
                .append(ClientStatusReport {
                    client_id: c,
                    round,
                    residual_limits: limits,
                    availability_flag: rng.random_bool(dev.availability_probability),
                    model_summary: vec![0.0, 0.0],
                })
                .unwrap();
        }
    }
    let clients: Vec<usize> = (0..16).collect();
    let a = recluster(&ledger, &clients, 4, &FeatureWeights::default(), 4, &mut seed_rng(2, "cluster"));
    let truth: Vec<usize> = types
        .iter()
        .map(|t| [DeviceType::A, DeviceType::B, DeviceType::C, DeviceType::D].iter().position(|x| x == t).unwrap())
        .collect();
    let ari = adjusted_rand(&labels_of(&a, 16), &truth);
    assert!(ari >= 0.9, "ARI {ari}");
}

#[test]
fn cluster_count_is_reduced_to_the_point_count() {
    let points = vec![vec![0.0], vec![1.0], vec![2.0]];
    let labels = kmeans(&points, 7, 2, &mut seed_rng(0, "k"));
    let mut distinct = labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    assert_eq!(distinct.len(), 3);
}

#[test]
fn assignment_digest_tracks_the_partition() {
    let a = ClusterAssignment::from_labels(&[0, 1, 2, 3], &[1, 1, 0, 0]);
    let b = ClusterAssignment::from_labels(&[0, 1, 2, 3], &[0, 0, 1, 1]);
    assert_eq!(a, b);
    assert_eq!(a.digest(), b.digest());
    let c = ClusterAssignment::from_labels(&[0, 1, 2, 3], &[0, 1, 0, 1]);
    assert_ne!(a.digest(), c.digest());
}

#[test]
fn leader_is_the_most_capable_member() {
    let w = CapabilityWeights::default();
    let mut ledger = StatusLedger::new();
    for (c, r) in [3.0, 9.0, 9.0].into_iter().enumerate() {
        ledger.append(report(c, 0, r, r, true)).unwrap();
    }
    assert_eq!(elect_leader(&[0, 1, 2], &ledger, &w), Some(1));
    assert_eq!(elect_leader(&[2], &ledger, &w), Some(2));
    assert_eq!(elect_leader(&[], &ledger, &w), None);
}

#[test]
fn a_drained_leader_hands_over() {
    let cfg = SimulationConfig::new(2);
    let w = CapabilityWeights::default();
    let strong = preset(DeviceType::D).unwrap();
    let weak = preset(DeviceType::C).unwrap();
    let limits = |dev, energy| resource_profile(dev, energy, &cfg).unwrap().limits().clone();
    let at = |c, round, l: BTreeMap<ResourceKind, f64>| ClientStatusReport {
        client_id: c,
        round,
        residual_limits: l,
        availability_flag: true,
        model_summary: vec![],
    };
    let mut ledger = StatusLedger::new();
    ledger.append(at(0, 0, limits(&strong, 1.0))).unwrap();
    ledger.append(at(1, 0, limits(&weak, 1.0))).unwrap();
    assert_eq!(elect_leader(&[0, 1], &ledger, &w), Some(0));

    // One stint costs the leader a share of its battery.
    let drained = 1.0 - cfg.leader_drain;
    ledger.append(at(0, 1, limits(&strong, drained))).unwrap();
    ledger.append(at(1, 1, limits(&weak, 1.0))).unwrap();
    assert_eq!(elect_leader(&[0, 1], &ledger, &w), Some(1));
}
