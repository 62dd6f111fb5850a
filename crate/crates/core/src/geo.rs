//! Positions, agents and the scenario container.
//!
//! All coordinates are kilometres in a local flat-earth frame: `x` east,
//! `y` north, `alt` above ground. UAV altitudes are kilometres too
//! (50 m is `0.05`).

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index of a HAP within its scenario (`0..n_haps`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HapId(pub u32);

/// Dense index of a UAV within its scenario (`0..m_uavs`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UavId(pub u32);

impl HapId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl UavId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for HapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

impl fmt::Display for UavId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub x: f64,
    pub y: f64,
    pub alt: f64,
}

impl GeoPoint {
    pub const fn new(x: f64, y: f64, alt: f64) -> Self {
        GeoPoint { x, y, alt }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.alt.is_finite()) {
            return Err(Error::Invalid(format!("non-finite coordinate in {self:?}")));
        }
        if self.alt < 0.0 {
            return Err(Error::Invalid(format!("negative altitude in {self:?}")));
        }
        Ok(())
    }
}

/// Straight-line separation in km.
pub fn distance_3d(a: GeoPoint, b: GeoPoint) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.alt - b.alt;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// A high-altitude platform. Each of its antennas is one unit of `capacity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hap {
    pub id: HapId,
    #[serde(flatten)]
    pub pos: GeoPoint,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uav {
    pub id: UavId,
    #[serde(flatten)]
    pub pos: GeoPoint,
    /// Ground users this UAV relays for.
    pub served_users: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub haps: Vec<Hap>,
    pub uavs: Vec<Uav>,
}

impl Scenario {
    pub fn n_haps(&self) -> usize {
        self.haps.len()
    }

    pub fn m_uavs(&self) -> usize {
        self.uavs.len()
    }

    pub fn capacities(&self) -> Vec<u32> {
        self.haps.iter().map(|h| h.capacity).collect()
    }

    pub fn served_users(&self) -> Vec<u32> {
        self.uavs.iter().map(|u| u.served_users).collect()
    }

    /// Checks every field invariant: dense ids in order, capacities ≥ 1,
    /// finite coordinates with non-negative altitude, both sides non-empty.
    pub fn validate(&self) -> Result<()> {
        if self.haps.is_empty() || self.uavs.is_empty() {
            return Err(Error::Invalid(format!(
                "scenario needs at least one HAP and one UAV (got {} and {})",
                self.haps.len(),
                self.uavs.len()
            )));
        }
        for (i, h) in self.haps.iter().enumerate() {
            if h.id.index() != i {
                return Err(Error::Invalid(format!(
                    "HAP at position {i} has id {}; ids must be dense and ordered",
                    h.id.0
                )));
            }
            if h.capacity == 0 {
                return Err(Error::Invalid(format!("HAP {} has zero capacity", h.id.0)));
            }
            h.pos.validate()?;
        }
        for (i, u) in self.uavs.iter().enumerate() {
            if u.id.index() != i {
                return Err(Error::Invalid(format!(
                    "UAV at position {i} has id {}; ids must be dense and ordered",
                    u.id.0
                )));
            }
            u.pos.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization is infallible")
    }

    /// Reads and validates a scenario file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scenario = Self::from_json(&text).map_err(|e| Error::parse(path, e))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}
