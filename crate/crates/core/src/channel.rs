//! HAP–UAV link budget.
//!
//! Total loss is `PL = PL_b + PL_g + PL_s` with basic loss
//! `PL_b = FSPL(d, f_c) + SF + CL` and
//! `FSPL = 92.45 + 20 log10(f_c [GHz]) + 20 log10(d [km])`.
//! Every link is treated as urban NLOS: clutter loss is a constant and
//! shadow fading is a zero-mean Gaussian in dB.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{distance_3d, HapId, Scenario, UavId};

/// FSPL constant for d in km and f in GHz.
pub const FSPL_CONSTANT_DB: f64 = 92.45;
pub const DEFAULT_CARRIER_FREQ_GHZ: f64 = 2.0;
pub const DEFAULT_ATMOSPHERIC_LOSS_DB: f64 = 23.0;
pub const DEFAULT_SCINTILLATION_LOSS_DB: f64 = 0.0;
pub const DEFAULT_CLUTTER_LOSS_DB: f64 = 25.5;
pub const DEFAULT_SHADOW_FADING_VARIANCE_DB2: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub carrier_freq_ghz: f64,
    /// Gaseous absorption.
    pub atmospheric_loss_db: f64,
    /// Ionospheric/tropospheric scintillation; zero at mid latitudes.
    pub scintillation_loss_db: f64,
    pub clutter_loss_db: f64,
    /// Variance (not standard deviation) of the shadow-fading term.
    pub shadow_fading_variance_db2: f64,
    /// Kept for the record; clutter loss is a constant and does not read it.
    pub elevation_angle_deg: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            carrier_freq_ghz: DEFAULT_CARRIER_FREQ_GHZ,
            atmospheric_loss_db: DEFAULT_ATMOSPHERIC_LOSS_DB,
            scintillation_loss_db: DEFAULT_SCINTILLATION_LOSS_DB,
            clutter_loss_db: DEFAULT_CLUTTER_LOSS_DB,
            shadow_fading_variance_db2: DEFAULT_SHADOW_FADING_VARIANCE_DB2,
            elevation_angle_deg: 90.0,
        }
    }
}

impl ChannelParams {
    /// Defaults with shadow fading switched off.
    pub fn deterministic() -> Self {
        ChannelParams {
            shadow_fading_variance_db2: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.carrier_freq_ghz.is_finite() && self.carrier_freq_ghz > 0.0) {
            bad.push("carrier_freq_ghz must be > 0");
        }
        if !(self.shadow_fading_variance_db2.is_finite() && self.shadow_fading_variance_db2 >= 0.0) {
            bad.push("shadow_fading_variance_db2 must be >= 0");
        }
        for (name, v) in [
            ("atmospheric_loss_db must be >= 0", self.atmospheric_loss_db),
            ("scintillation_loss_db must be >= 0", self.scintillation_loss_db),
            ("clutter_loss_db must be >= 0", self.clutter_loss_db),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                bad.push(name);
            }
        }
        if !self.elevation_angle_deg.is_finite() {
            bad.push("elevation_angle_deg must be finite");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(format!("channel params: {}", bad.join("; "))))
        }
    }
}

/// Free-space path loss in dB for a distance in km and a frequency in GHz.
pub fn fspl(d_km: f64, f_ghz: f64) -> Result<f64> {
    if !(d_km > 0.0 && d_km.is_finite()) {
        return Err(Error::Domain(format!("FSPL distance must be > 0 km, got {d_km}")));
    }
    if !(f_ghz > 0.0 && f_ghz.is_finite()) {
        return Err(Error::Domain(format!("FSPL frequency must be > 0 GHz, got {f_ghz}")));
    }
    Ok(FSPL_CONSTANT_DB + 20.0 * f_ghz.log10() + 20.0 * d_km.log10())
}

pub fn basic_path_loss(d_km: f64, f_ghz: f64, shadow_fading_db: f64, clutter_loss_db: f64) -> Result<f64> {
    Ok(fspl(d_km, f_ghz)? + shadow_fading_db + clutter_loss_db)
}

pub fn total_path_loss(basic_db: f64, atmospheric_db: f64, scintillation_db: f64) -> f64 {
    basic_db + atmospheric_db + scintillation_db
}

/// One zero-mean Gaussian draw with the given variance.
///
/// Always consumes exactly one standard-normal sample from `rng`, including
/// when the variance is zero, so that stream alignment does not depend on
/// the parameter.
pub fn sample_shadow_fading<R: Rng + ?Sized>(rng: &mut R, variance_db2: f64) -> Result<f64> {
    if !(variance_db2 >= 0.0 && variance_db2.is_finite()) {
        return Err(Error::Domain(format!(
            "shadow fading variance must be >= 0, got {variance_db2}"
        )));
    }
    let z: f64 = rng.sample(StandardNormal);
    Ok(0.0 + variance_db2.sqrt() * z)
}

/// Dense HAP×UAV loss table, row-major by HAP.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossMatrix {
    n_haps: usize,
    m_uavs: usize,
    loss_db: Vec<f64>,
    shadow_db: Vec<f64>,
}

impl PathLossMatrix {
    /// Wraps raw row-major losses with no shadow-fading record. Used for
    /// hand-built instances.
    pub fn from_rows(n_haps: usize, m_uavs: usize, loss_db: Vec<f64>) -> Result<Self> {
        if loss_db.len() != n_haps * m_uavs {
            return Err(Error::Invalid(format!(
                "expected {}x{} = {} losses, got {}",
                n_haps,
                m_uavs,
                n_haps * m_uavs,
                loss_db.len()
            )));
        }
        if let Some(i) = loss_db.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite loss at flat index {i}")));
        }
        Ok(PathLossMatrix {
            n_haps,
            m_uavs,
            shadow_db: vec![0.0; loss_db.len()],
            loss_db,
        })
    }

    pub fn n_haps(&self) -> usize {
        self.n_haps
    }

    pub fn m_uavs(&self) -> usize {
        self.m_uavs
    }

    #[inline]
    pub fn loss(&self, h: HapId, u: UavId) -> f64 {
        self.loss_db[h.index() * self.m_uavs + u.index()]
    }

    /// The shadow-fading sample that went into `loss(h, u)`.
    #[inline]
    pub fn shadow_fading(&self, h: HapId, u: UavId) -> f64 {
        self.shadow_db[h.index() * self.m_uavs + u.index()]
    }

    /// Losses of one HAP to every UAV.
    pub fn row(&self, h: HapId) -> &[f64] {
        let start = h.index() * self.m_uavs;
        &self.loss_db[start..start + self.m_uavs]
    }

    /// Copy with `offset_db` added to every entry.
    pub fn shifted(&self, offset_db: f64) -> Self {
        PathLossMatrix {
            loss_db: self.loss_db.iter().map(|v| v + offset_db).collect(),
            ..self.clone()
        }
    }

    /// CSV dump: `hap_id,uav_id,loss_db` with six decimals, row-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "hap_id,uav_id,loss_db")?;
        for h in 0..self.n_haps {
            for u in 0..self.m_uavs {
                writeln!(out, "{},{},{:.6}", h, u, self.loss_db[h * self.m_uavs + u])?;
            }
        }
        out.flush()
    }
}

/// Builds the per-link total loss for every HAP–UAV pair.
///
/// Shadow fading is drawn once per link in row-major (HAP, then UAV) order.
pub fn build_path_loss_matrix<R: Rng + ?Sized>(
    scenario: &Scenario,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<PathLossMatrix> {
    params.validate()?;
    let (n, m) = (scenario.n_haps(), scenario.m_uavs());
    if n == 0 || m == 0 {
        return Err(Error::Invalid("path-loss matrix needs a non-empty scenario".into()));
    }
    let mut loss_db = Vec::with_capacity(n * m);
    let mut shadow_db = Vec::with_capacity(n * m);
    for hap in &scenario.haps {
        for uav in &scenario.uavs {
            let d = distance_3d(hap.pos, uav.pos);
            if d <= 0.0 {
                return Err(Error::Domain(format!(
                    "HAP {} and UAV {} are coincident",
                    hap.id.0, uav.id.0
                )));
            }
            let sf = sample_shadow_fading(rng, params.shadow_fading_variance_db2)?;
            let basic = basic_path_loss(d, params.carrier_freq_ghz, sf, params.clutter_loss_db)?;
            loss_db.push(total_path_loss(
                basic,
                params.atmospheric_loss_db,
                params.scintillation_loss_db,
            ));
            shadow_db.push(sf);
        }
    }
    Ok(PathLossMatrix {
        n_haps: n,
        m_uavs: m,
        loss_db,
        shadow_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{GeoPoint, Hap, Uav};
    use crate::rng::stream;

    // Reference values computed with 30-digit decimal arithmetic.
    const FSPL_20KM_2GHZ: f64 = 124.491_199_826_559_25;
    const BASIC_20KM_2GHZ_SF: f64 = 147.591_199_826_559_25;
    const TOTAL_20KM_2GHZ_SF: f64 = 170.591_199_826_559_25;
    const SINGLE_LINK_TOTAL: f64 = 172.903_903_718_510_25;
    const TWENTY_LOG10_TWO: f64 = 6.020_599_913_279_624;

    #[test]
    fn fspl_examples() {
        assert_eq!(fspl(1.0, 1.0).unwrap(), 92.45);
        assert_eq!(fspl(10.0, 1.0).unwrap(), 112.45);
        assert!((fspl(20.0, 2.0).unwrap() - FSPL_20KM_2GHZ).abs() < 1e-10);
    }

    #[test]
    fn fspl_rejects_non_positive_inputs() {
        assert!(matches!(fspl(0.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(fspl(-1.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(fspl(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(basic_path_loss(0.0, 2.0, 0.0, 25.5), Err(Error::Domain(_))));
    }

    #[test]
    fn basic_and_total_examples() {
        assert_eq!(basic_path_loss(1.0, 1.0, 0.0, 0.0).unwrap(), 92.45);
        assert!((basic_path_loss(1.0, 1.0, 0.0, 25.5).unwrap() - 117.95).abs() < 1e-12);
        let b = basic_path_loss(20.0, 2.0, -2.4, 25.5).unwrap();
        assert!((b - BASIC_20KM_2GHZ_SF).abs() < 1e-10);

        assert!((total_path_loss(117.95, 23.0, 0.0) - 140.95).abs() < 1e-12);
        assert_eq!(total_path_loss(0.0, 0.0, 0.0), 0.0);
        assert!((total_path_loss(b, 23.0, 0.0) - TOTAL_20KM_2GHZ_SF).abs() < 1e-10);
    }

    #[test]
    fn zero_variance_gives_zero_and_still_draws() {
        let mut a = stream(5, 0);
        let mut b = stream(5, 0);
        assert_eq!(sample_shadow_fading(&mut a, 0.0).unwrap(), 0.0);
        let _ = sample_shadow_fading(&mut b, 6.0).unwrap();
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn negative_variance_is_domain_error() {
        let mut r = stream(1, 0);
        assert!(matches!(sample_shadow_fading(&mut r, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn shadow_fading_is_reproducible() {
        let draw = |seed| {
            let mut r = stream(seed, 1);
            (0..100)
                .map(|_| sample_shadow_fading(&mut r, 6.0).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));
    }

    fn single_link() -> Scenario {
        Scenario {
            seed: 0,
            haps: vec![Hap {
                id: HapId(0),
                pos: GeoPoint::new(0.0, 0.0, 20.0),
                capacity: 1,
            }],
            uavs: vec![Uav {
                id: UavId(0),
                pos: GeoPoint::new(0.0, 0.0, 0.2),
                served_users: 1,
            }],
        }
    }

    #[test]
    fn single_link_matrix() {
        let m = build_path_loss_matrix(&single_link(), &ChannelParams::deterministic(), &mut stream(1, 1)).unwrap();
        assert!((m.loss(HapId(0), UavId(0)) - SINGLE_LINK_TOTAL).abs() < 1e-9);
    }

    #[test]
    fn coincident_positions_are_rejected() {
        let mut s = single_link();
        s.uavs[0].pos = s.haps[0].pos;
        let err = build_path_loss_matrix(&s, &ChannelParams::default(), &mut stream(1, 1)).unwrap_err();
        assert!(err.to_string().contains("HAP 0 and UAV 0"));
    }

    #[test]
    fn doubling_distance_adds_six_db() {
        for d in [0.1, 1.0, 19.8, 73.0] {
            let delta = fspl(2.0 * d, 2.0).unwrap() - fspl(d, 2.0).unwrap();
            assert!((delta - TWENTY_LOG10_TWO).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_format() {
        let m = PathLossMatrix::from_rows(1, 2, vec![100.0, 110.123_456_789]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "hap_id,uav_id,loss_db\n0,0,100.000000\n0,1,110.123457\n"
        );
    }

    #[test]
    fn from_rows_checks_shape() {
        assert!(PathLossMatrix::from_rows(2, 2, vec![1.0; 3]).is_err());
        assert!(PathLossMatrix::from_rows(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ChannelParams::default().validate().is_ok());
        let p = ChannelParams {
            carrier_freq_ghz: 0.0,
            shadow_fading_variance_db2: -1.0,
            ..Default::default()
        };
        let msg = p.validate().unwrap_err().to_string();
        assert!(msg.contains("carrier_freq_ghz") && msg.contains("variance"));
    }
}
