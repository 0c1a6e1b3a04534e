//! Per-round upload/download rate planning.
//!
//! A client maximises `γ_up + γ_down` subject to one linear budget per resource,
//! `(C_up·γ_up + C_down·γ_down)·|θ| ≤ L`, inside the unit box. With two
//! variables the feasible set is a polygon, so the optimum is found exactly by
//! enumerating the pairwise intersections of its boundary lines.

use serde::{Deserialize, Serialize};

use crate::resources::ResourceProfile;
use crate::scalar::Scalar;

/// Relative slack allowed when checking a budget constraint.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RatePlan<T: Scalar> {
    pub gamma_up: T,
    pub gamma_down: T,
    pub round: u64,
}

impl<T: Scalar> RatePlan<T> {
    pub fn objective(&self) -> T {
        self.gamma_up + self.gamma_down
    }

    /// Caps both fractions, e.g. to a configured maximum rate.
    pub fn capped(self, up_cap: T, down_cap: T) -> Self {
        Self { gamma_up: self.gamma_up.min(up_cap), gamma_down: self.gamma_down.min(down_cap), round: self.round }
    }
}

// a·x + b·y = c
#[derive(Clone, Copy)]
struct Line<T> {
    a: T,
    b: T,
    c: T,
}

/// Solves the rate program exactly.
///
/// Ties between optimal vertices prefer the larger `γ_up`, then the larger
/// `γ_down`. A negative limit means the budget is already exhausted and yields
/// `(0, 0)`.
///
/// # Panics
///
/// If `model_len` is zero.
pub fn solve_rates<T: Scalar>(profile: &ResourceProfile<T>, model_len: usize, round: u64) -> RatePlan<T> {
    assert!(model_len > 0, "model length must be positive");
    let zero = T::zero();
    let one = T::one();
    let none = RatePlan { gamma_up: zero, gamma_down: zero, round };
    if profile.lines().any(|l| l.limit < zero) {
        return none;
    }
    let len = T::from_usize(model_len).expect("usize fits in a float");

    let mut lines = vec![
        Line { a: one, b: zero, c: zero },
        Line { a: one, b: zero, c: one },
        Line { a: zero, b: one, c: zero },
        Line { a: zero, b: one, c: one },
    ];
    lines.extend(profile.lines().filter(|l| l.cost_up > zero || l.cost_down > zero).map(|l| Line {
        a: l.cost_up * len,
        b: l.cost_down * len,
        c: l.limit,
    }));

    let mut best: Option<(T, T)> = None;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (p, q) = (lines[i], lines[j]);
            let det = p.a * q.b - p.b * q.a;
            if det == zero {
                continue;
            }
            let x = ((p.c * q.b - p.b * q.c) / det).max(zero).min(one);
            let y = ((p.a * q.c - p.c * q.a) / det).max(zero).min(one);
            let candidate = RatePlan { gamma_up: x, gamma_down: y, round };
            if !feasibility_check(&candidate, profile, model_len) {
                continue;
            }
            best = Some(match best {
                None => (x, y),
                Some(cur) => better((x, y), cur),
            });
        }
    }
    // (0, 0) is always a vertex and always feasible when no limit is negative.
    let (gamma_up, gamma_down) = best.unwrap_or((zero, zero));
    RatePlan { gamma_up, gamma_down, round }
}

fn better<T: Scalar>(a: (T, T), b: (T, T)) -> (T, T) {
    let eps = T::lit(1e-12);
    let (oa, ob) = (a.0 + a.1, b.0 + b.1);
    if oa > ob + eps {
        return a;
    }
    if ob > oa + eps {
        return b;
    }
    if a.0 > b.0 + eps {
        return a;
    }
    if b.0 > a.0 + eps {
        return b;
    }
    if a.1 > b.1 {
        a
    } else {
        b
    }
}

/// True iff the plan lies in the unit box and meets every budget within
/// [`FEASIBILITY_TOLERANCE`] (relative to the limit, with an absolute floor of
/// the same size).
pub fn feasibility_check<T: Scalar>(plan: &RatePlan<T>, profile: &ResourceProfile<T>, model_len: usize) -> bool {
    let tol = T::lit(FEASIBILITY_TOLERANCE);
    let one = T::one();
    let in_box = |g: T| g >= -tol && g <= one + tol;
    if !in_box(plan.gamma_up) || !in_box(plan.gamma_down) {
        return false;
    }
    let len = T::from_usize(model_len).expect("usize fits in a float");
    profile.lines().all(|l| {
        let used = (l.cost_up * plan.gamma_up + l.cost_down * plan.gamma_down) * len;
        used <= l.limit + tol * l.limit.abs().max(one)
    })
}
