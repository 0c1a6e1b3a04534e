use ofl_core::resources::ResourceKind;
use ofl_core::{feasibility_check, solve_rates, RatePlan, ResourceProfile};
use proptest::prelude::*;
use rand::Rng;

/// Exact maximum over a γ_up grid: for each γ_up the best γ_down is a closed-form min.
fn grid_oracle(lines: &[(ResourceKind, f64, f64, f64)], len: f64, step: f64) -> f64 {
    let n = (1.0 / step).round() as usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        let up = i as f64 * step;
        let mut down: f64 = 1.0;
        let mut ok = true;
        for &(_, l, cu, cd) in lines {
            let rest = l.max(0.0) - cu * up * len;
            if rest < -1e-12 {
                ok = false;
                break;
            }
            if cd > 0.0 {
                down = down.min(rest / (cd * len));
            }
        }
        if ok {
            best = best.max(up + down.max(0.0));
        }
    }
    best
}

fn random_lines(rng: &mut impl Rng) -> Vec<(ResourceKind, f64, f64, f64)> {
    let k = rng.random_range(1..=5);
    ResourceKind::ALL[..k]
        .iter()
        .map(|&kind| {
            let cu = if rng.random_bool(0.15) { 0.0 } else { rng.random_range(0.0..3.0) };
            let cd = if rng.random_bool(0.15) { 0.0 } else { rng.random_range(0.0..3.0) };
            (kind, rng.random_range(0.0..4.0), cu, cd)
        })
        .collect()
}

#[test]
fn matches_grid_oracle_on_random_instances() {
    let mut rng = ofl_core::seed_rng(11, "planner-oracle");
    for _ in 0..300 {
        let lines = random_lines(&mut rng);
        let len = rng.random_range(1..=4) as f64;
        let profile = ResourceProfile::from_lines(&lines).unwrap();
        let plan = solve_rates(&profile, len as usize, 0);
        assert!(feasibility_check(&plan, &profile, len as usize));
        let oracle = grid_oracle(&lines, len, 1e-3);
        assert!(plan.objective() >= oracle - 2e-3, "{lines:?}: {} vs {oracle}", plan.objective());
        // The exact optimum can never beat the oracle by more than one grid step.
        assert!(plan.objective() <= oracle + 1e-3 * (1.0 + 3.0 * 4.0) + 1e-9);
    }
}

#[test]
fn derived_instance() {
    let profile = ResourceProfile::from_lines(&[(ResourceKind::Comm, 1.5, 2.0, 1.0)]).unwrap();
    let plan: RatePlan<f64> = solve_rates(&profile, 1, 3);
    assert!((plan.gamma_up - 0.25).abs() < 1e-12 && (plan.gamma_down - 1.0).abs() < 1e-12);
    assert!((plan.objective() - 1.25).abs() < 1e-12);
    assert!(feasibility_check(&plan, &profile, 1));
    let full = RatePlan { gamma_up: 1.0, gamma_down: 1.0, round: 3 };
    assert!(!feasibility_check(&full, &profile, 1));
    let zero = RatePlan { gamma_up: 0.0, gamma_down: 0.0, round: 3 };
    assert!(feasibility_check(&zero, &profile, 1));
}

proptest! {
    #[test]
    fn enlarging_a_limit_never_hurts(seed in any::<u64>(), which in 0usize..5, extra in 0.0f64..3.0) {
        let mut rng = ofl_core::seed_rng(seed, "mono");
        let mut lines = random_lines(&mut rng);
        let base = solve_rates(&ResourceProfile::from_lines(&lines).unwrap(), 2, 0).objective();
        let i = which % lines.len();
        lines[i].1 += extra;
        let grown = solve_rates(&ResourceProfile::from_lines(&lines).unwrap(), 2, 0).objective();
        prop_assert!(grown >= base - 1e-12);
    }
}
