//! Resource budgets and device descriptions.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// The five resource dimensions a client budgets per round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Comp,
    Comm,
    Data,
    Avai,
    Priv,
}

impl ResourceKind {
    pub const ALL: [ResourceKind; 5] =
        [ResourceKind::Comp, ResourceKind::Comm, ResourceKind::Data, ResourceKind::Avai, ResourceKind::Priv];
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ResourceKind::Comp => "comp",
            ResourceKind::Comm => "comm",
            ResourceKind::Data => "data",
            ResourceKind::Avai => "avai",
            ResourceKind::Priv => "priv",
        };
        f.write_str(s)
    }
}

/// Per-round limits and per-parameter costs, in abstract cost units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ResourceProfile<T: Scalar> {
    limits: BTreeMap<ResourceKind, T>,
    cost_up: BTreeMap<ResourceKind, T>,
    cost_down: BTreeMap<ResourceKind, T>,
}

/// One resource's limit together with its upload and download cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceLine<T> {
    pub kind: ResourceKind,
    pub limit: T,
    pub cost_up: T,
    pub cost_down: T,
}

impl<T: Scalar> ResourceProfile<T> {
    /// Validates that every cost is non-negative and every limited resource has both costs.
    ///
    /// Negative limits are accepted here; the planner treats them as an exhausted budget.
    pub fn new(
        limits: BTreeMap<ResourceKind, T>,
        cost_up: BTreeMap<ResourceKind, T>,
        cost_down: BTreeMap<ResourceKind, T>,
    ) -> Result<Self> {
        for (kind, limit) in &limits {
            if !limit.is_finite() {
                return Err(invalid("limits", format!("{kind} limit is not finite")));
            }
            for (name, costs) in [("cost_up", &cost_up), ("cost_down", &cost_down)] {
                match costs.get(kind) {
                    None => return Err(invalid(name, format!("missing cost for {kind}"))),
                    Some(c) if !(c.is_finite() && *c >= T::zero()) => {
                        return Err(invalid(name, format!("{kind} cost must be finite and >= 0")))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(Self { limits, cost_up, cost_down })
    }

    /// Convenience constructor from `(kind, limit, cost_up, cost_down)` rows.
    pub fn from_lines(lines: &[(ResourceKind, T, T, T)]) -> Result<Self> {
        let mut limits = BTreeMap::new();
        let mut up = BTreeMap::new();
        let mut down = BTreeMap::new();
        for &(kind, l, u, d) in lines {
            limits.insert(kind, l);
            up.insert(kind, u);
            down.insert(kind, d);
        }
        Self::new(limits, up, down)
    }

    pub fn lines(&self) -> impl Iterator<Item = ResourceLine<T>> + '_ {
        self.limits.iter().map(move |(&kind, &limit)| ResourceLine {
            kind,
            limit,
            cost_up: self.cost_up[&kind],
            cost_down: self.cost_down[&kind],
        })
    }

    pub fn limit(&self, kind: ResourceKind) -> Option<T> {
        self.limits.get(&kind).copied()
    }

    pub fn limits(&self) -> &BTreeMap<ResourceKind, T> {
        &self.limits
    }

    pub fn cost_up(&self, kind: ResourceKind) -> Option<T> {
        self.cost_up.get(&kind).copied()
    }

    pub fn cost_down(&self, kind: ResourceKind) -> Option<T> {
        self.cost_down.get(&kind).copied()
    }

    /// Same costs, new limits. Kinds absent from `limits` keep their old limit.
    pub fn with_limits(&self, limits: &BTreeMap<ResourceKind, T>) -> Self {
        let mut next = self.clone();
        for (k, v) in limits {
            if next.limits.contains_key(k) {
                next.limits.insert(*k, *v);
            }
        }
        next
    }
}

/// Device class tag. `A`..`D` are the four testbed presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DeviceType {
    A,
    B,
    C,
    D,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for DeviceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DeviceType::A => "A",
            DeviceType::B => "B",
            DeviceType::C => "C",
            DeviceType::D => "D",
            DeviceType::Custom => "custom",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub type_tag: DeviceType,
    /// Local iterations per simulated second.
    pub relative_compute_speed: f64,
    /// Parameters transferred per simulated second.
    pub bandwidth: f64,
    pub availability_probability: f64,
}

impl DeviceProfile {
    pub fn new(
        type_tag: DeviceType,
        relative_compute_speed: f64,
        bandwidth: f64,
        availability_probability: f64,
    ) -> Result<Self> {
        if !(relative_compute_speed.is_finite() && relative_compute_speed > 0.0) {
            return Err(invalid("relative_compute_speed", "must be positive"));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(invalid("bandwidth", "must be positive"));
        }
        if !(0.0..=1.0).contains(&availability_probability) {
            return Err(invalid("availability_probability", "must lie in [0, 1]"));
        }
        Ok(Self { type_tag, relative_compute_speed, bandwidth, availability_probability })
    }
}
