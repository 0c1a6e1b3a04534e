use ofl_core::intra::LeaderState;
use ofl_core::{ParameterVector, SelectedUpdate};
use proptest::prelude::*;

proptest! {
    #[test]
    fn leader_entries_stay_in_hull(
        init in proptest::collection::vec(-5.0f64..5.0, 4),
        members in 1usize..6,
        uploads in proptest::collection::vec((0usize..4, -10.0f64..10.0), 1..40),
    ) {
        let mut s = LeaderState::new(ParameterVector::new(init.clone()).unwrap(), members);
        let mut lo = init.clone();
        let mut hi = init;
        for (k, (j, v)) in uploads.into_iter().enumerate() {
            let u = SelectedUpdate { indices: vec![j], values: vec![v], sender: k, round: k as u64 };
            s.leader_accumulate(&u, None).unwrap();
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
            for i in 0..4 {
                prop_assert!(s.leader_model[i] >= lo[i] - 1e-12 && s.leader_model[i] <= hi[i] + 1e-12);
            }
        }
    }

    #[test]
    fn repeated_identical_uploads_converge(members in 2usize..6, rounds in 40usize..80, order_seed in any::<u64>()) {
        let target = [1.0f64, -2.0, 0.5, 3.0];
        let mut s = LeaderState::new(ParameterVector::zeros(4).unwrap(), members);
        let mut prev_err = f64::INFINITY;
        for r in 0..rounds {
            for m in 0..members {
                let sender = (m + (order_seed as usize) + r) % members;
                let u = SelectedUpdate { indices: vec![0, 1, 2, 3], values: target.to_vec(), sender, round: r as u64 };
                s.leader_accumulate(&u, None).unwrap();
            }
            let err = (0..4).map(|i| (s.leader_model[i] - target[i]).abs()).fold(0.0, f64::max);
            prop_assert!(err <= prev_err);
            prev_err = err;
        }
        let rate = 1.0 - 1.0 / members as f64;
        prop_assert!(prev_err <= 3.0 * rate.powi((rounds * members) as i32) + 1e-12);
    }
}
