//! The four testbed device classes and the per-round budgets derived from them.

use ofl_core::{DeviceProfile, DeviceType, ResourceKind, ResourceProfile};

use crate::config::SimulationConfig;
use crate::error::{config, Result};

/// Testbed board settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hardware {
    pub cores: u32,
    pub max_cpu_ghz: f64,
    pub max_emc_mhz: f64,
}

pub fn hardware(t: DeviceType) -> Option<Hardware> {
    let (cores, ghz, emc) = match t {
        DeviceType::A => (2, 1.497, 1600.0),
        DeviceType::B => (4, 1.190, 1600.0),
        DeviceType::C => (4, 1.420, 1600.0),
        DeviceType::D => (6, 1.420, 1866.0),
        DeviceType::Custom => return None,
    };
    Some(Hardware { cores, max_cpu_ghz: ghz, max_emc_mhz: emc })
}

/// Compute speed is cores × max frequency (local iterations per simulated second);
/// bandwidth is the memory-controller frequency read as parameter values per second.
pub fn preset(t: DeviceType) -> Option<DeviceProfile> {
    let hw = hardware(t)?;
    let availability = match t {
        DeviceType::A => 0.70,
        DeviceType::B => 0.80,
        DeviceType::C => 0.90,
        _ => 0.95,
    };
    DeviceProfile::new(t, hw.cores as f64 * hw.max_cpu_ghz, hw.max_emc_mhz, availability).ok()
}

pub fn profiles(cfg: &SimulationConfig) -> Result<Vec<DeviceProfile>> {
    cfg.device_types()
        .into_iter()
        .map(|t| {
            let mut p = preset(t).ok_or_else(|| config("device_types", format!("no preset for {t}")))?;
            if let Some(a) = cfg.availability {
                p.availability_probability = a;
            }
            Ok(p)
        })
        .collect()
}

/// Compute cost of one local iteration over one parameter, in iterations.
pub const COMP_COST_PER_PARAM: f64 = 0.01;

/// Budgets for one round given the remaining battery fraction `energy`.
///
/// Compute and bandwidth scale with energy; the privacy limit is fixed per round.
pub fn resource_profile(dev: &DeviceProfile, energy: f64, cfg: &SimulationConfig) -> Result<ResourceProfile<f64>> {
    let secs = cfg.round_seconds;
    let eps = cfg.epsilon_select + cfg.epsilon_perturb;
    Ok(ResourceProfile::from_lines(&[
        (
            ResourceKind::Comp,
            dev.relative_compute_speed * secs * energy,
            cfg.t_lt as f64 * COMP_COST_PER_PARAM,
            COMP_COST_PER_PARAM,
        ),
        (ResourceKind::Comm, dev.bandwidth * secs * energy, 1.0, 1.0),
        (ResourceKind::Priv, cfg.privacy_per_round, eps, 0.0),
    ])?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_follow_the_board_table() {
        let s: Vec<f64> = [DeviceType::A, DeviceType::B, DeviceType::C, DeviceType::D]
            .iter()
            .map(|t| preset(*t).unwrap().relative_compute_speed)
            .collect();
        let want = [2.994, 4.76, 5.68, 8.52];
        for (a, b) in s.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!(preset(DeviceType::Custom).is_none());
    }
}
