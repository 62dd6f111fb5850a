//! Random HAP/UAV topologies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{GeoPoint, Hap, HapId, Scenario, Uav, UavId};
use crate::rng::{stream, SCENARIO_STREAM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_haps: usize,
    pub m_uavs: usize,
    /// Antennas per HAP.
    pub hap_capacity: u32,
    /// Side of the square ground area, km.
    pub area_side_km: f64,
    pub hap_alt_range_km: [f64; 2],
    pub uav_alt_range_km: [f64; 2],
    pub users_range: [u32; 2],
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_haps: 100,
            m_uavs: 500,
            hap_capacity: 5,
            area_side_km: 100.0,
            hap_alt_range_km: [18.0, 22.0],
            uav_alt_range_km: [0.05, 0.35],
            users_range: [1, 10],
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.n_haps == 0 {
            bad.push("n_haps must be >= 1".to_string());
        }
        if self.m_uavs == 0 {
            bad.push("m_uavs must be >= 1".to_string());
        }
        if self.n_haps > u32::MAX as usize || self.m_uavs > u32::MAX as usize {
            bad.push("agent counts must fit in 32 bits".to_string());
        }
        if self.hap_capacity == 0 {
            bad.push("hap_capacity must be >= 1".to_string());
        }
        if !(self.area_side_km.is_finite() && self.area_side_km >= 0.0) {
            bad.push("area_side_km must be finite and >= 0".to_string());
        }
        for (name, [lo, hi]) in [
            ("hap_alt_range_km", self.hap_alt_range_km),
            ("uav_alt_range_km", self.uav_alt_range_km),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                bad.push(format!("{name} must satisfy 0 < lo <= hi (got [{lo}, {hi}])"));
            }
        }
        let [ulo, uhi] = self.users_range;
        if ulo > uhi {
            bad.push(format!("users_range lower bound {ulo} exceeds upper bound {uhi}"));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(format!("scenario config: {}", bad.join("; "))))
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    rng.random_range(lo..=hi)
}

/// Draws a topology from `config.seed`.
///
/// Draw order is HAPs by id then UAVs by id; within an agent `x`, `y`,
/// `alt`, then (UAVs only) `served_users`.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let mut rng = stream(config.seed, SCENARIO_STREAM);
    let ground = [0.0, config.area_side_km];

    let haps = (0..config.n_haps as u32)
        .map(|i| {
            let x = uniform(&mut rng, ground);
            let y = uniform(&mut rng, ground);
            let alt = uniform(&mut rng, config.hap_alt_range_km);
            Hap {
                id: HapId(i),
                pos: GeoPoint::new(x, y, alt),
                capacity: config.hap_capacity,
            }
        })
        .collect();

    let [ulo, uhi] = config.users_range;
    let uavs = (0..config.m_uavs as u32)
        .map(|i| {
            let x = uniform(&mut rng, ground);
            let y = uniform(&mut rng, ground);
            let alt = uniform(&mut rng, config.uav_alt_range_km);
            Uav {
                id: UavId(i),
                pos: GeoPoint::new(x, y, alt),
                served_users: rng.random_range(ulo..=uhi),
            }
        })
        .collect();

    Ok(Scenario {
        seed: config.seed,
        haps,
        uavs,
    })
}
