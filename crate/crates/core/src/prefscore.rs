//! Preference lists and the matching score.
//!
//! A HAP ranks UAVs by `loss_db - w * served_users` (lower first), trading
//! path loss against the number of ground users the UAV relays for. A UAV
//! ranks HAPs by path loss alone. The same key scores a finished matching.

use serde::{Deserialize, Serialize};

use crate::channel::PathLossMatrix;
use crate::error::{Error, Result};
use crate::geo::{HapId, UavId};
use crate::matching::Matching;

pub const DEFAULT_USER_WEIGHT_DB: f64 = 1.0;

/// HAP-side preference key; lower is better.
#[inline]
pub fn hap_preference_key(loss_db: f64, served_users: u32, user_weight: f64) -> f64 {
    loss_db - user_weight * served_users as f64
}

/// Complete strict preference lists for both sides, plus rank lookup tables.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceProfile {
    hap_prefs: Vec<Vec<UavId>>,
    uav_prefs: Vec<Vec<HapId>>,
    /// `hap_rank[h * m + u]` is the position of `u` in `h`'s list.
    hap_rank: Vec<u32>,
    /// `uav_rank[u * n + h]` is the position of `h` in `u`'s list.
    uav_rank: Vec<u32>,
    user_weight_db_per_user: f64,
}

impl PreferenceProfile {
    /// Validates that every list is a permutation of the opposite side.
    pub fn from_lists(hap_prefs: Vec<Vec<UavId>>, uav_prefs: Vec<Vec<HapId>>) -> Result<Self> {
        Self::with_weight(hap_prefs, uav_prefs, 0.0)
    }

    fn with_weight(hap_prefs: Vec<Vec<UavId>>, uav_prefs: Vec<Vec<HapId>>, user_weight: f64) -> Result<Self> {
        let (n, m) = (hap_prefs.len(), uav_prefs.len());
        if n == 0 || m == 0 {
            return Err(Error::Invalid("preference profile needs agents on both sides".into()));
        }
        let hap_rank = rank_table(&hap_prefs, m, |u: &UavId| u.index(), "HAP")?;
        let uav_rank = rank_table(&uav_prefs, n, |h: &HapId| h.index(), "UAV")?;
        Ok(PreferenceProfile {
            hap_prefs,
            uav_prefs,
            hap_rank,
            uav_rank,
            user_weight_db_per_user: user_weight,
        })
    }

    pub fn n_haps(&self) -> usize {
        self.hap_prefs.len()
    }

    pub fn m_uavs(&self) -> usize {
        self.uav_prefs.len()
    }

    pub fn user_weight(&self) -> f64 {
        self.user_weight_db_per_user
    }

    /// `h`'s ranking of UAVs, best first.
    pub fn hap_list(&self, h: HapId) -> &[UavId] {
        &self.hap_prefs[h.index()]
    }

    /// `u`'s ranking of HAPs, best first.
    pub fn uav_list(&self, u: UavId) -> &[HapId] {
        &self.uav_prefs[u.index()]
    }

    /// Position of `u` in `h`'s list (0 = favourite).
    #[inline]
    pub fn hap_rank(&self, h: HapId, u: UavId) -> u32 {
        self.hap_rank[h.index() * self.m_uavs() + u.index()]
    }

    /// Position of `h` in `u`'s list (0 = favourite).
    #[inline]
    pub fn uav_rank(&self, u: UavId, h: HapId) -> u32 {
        self.uav_rank[u.index() * self.n_haps() + h.index()]
    }
}

fn rank_table<T>(lists: &[Vec<T>], other: usize, index: impl Fn(&T) -> usize, side: &str) -> Result<Vec<u32>> {
    let mut ranks = vec![u32::MAX; lists.len() * other];
    for (a, list) in lists.iter().enumerate() {
        if list.len() != other {
            return Err(Error::Invalid(format!(
                "{side} {a} ranks {} agents, expected {other}",
                list.len()
            )));
        }
        let row = &mut ranks[a * other..(a + 1) * other];
        for (pos, item) in list.iter().enumerate() {
            let i = index(item);
            if i >= other || row[i] != u32::MAX {
                return Err(Error::Invalid(format!(
                    "{side} {a}'s list is not a permutation (bad or repeated entry {i})"
                )));
            }
            row[i] = pos as u32;
        }
    }
    Ok(ranks)
}

/// Builds both sides' rankings from a loss matrix.
///
/// Ties are broken by ascending id of the ranked agent.
pub fn build_preferences(matrix: &PathLossMatrix, served_users: &[u32], user_weight: f64) -> Result<PreferenceProfile> {
    let (n, m) = (matrix.n_haps(), matrix.m_uavs());
    if served_users.len() != m {
        return Err(Error::Invalid(format!(
            "matrix has {m} UAV columns but {} served-user counts were given",
            served_users.len()
        )));
    }
    if !(user_weight.is_finite() && user_weight >= 0.0) {
        return Err(Error::Invalid(format!(
            "user weight must be finite and >= 0, got {user_weight}"
        )));
    }

    let hap_prefs = (0..n as u32)
        .map(HapId)
        .map(|h| {
            let row = matrix.row(h);
            let keys: Vec<f64> = row
                .iter()
                .zip(served_users)
                .map(|(&loss, &users)| hap_preference_key(loss, users, user_weight))
                .collect();
            let mut order: Vec<UavId> = (0..m as u32).map(UavId).collect();
            order.sort_by(|a, b| keys[a.index()].total_cmp(&keys[b.index()]).then(a.cmp(b)));
            order
        })
        .collect();

    let uav_prefs = (0..m as u32)
        .map(UavId)
        .map(|u| {
            let mut order: Vec<HapId> = (0..n as u32).map(HapId).collect();
            order.sort_by(|&a, &b| matrix.loss(a, u).total_cmp(&matrix.loss(b, u)).then(a.cmp(&b)));
            order
        })
        .collect();

    PreferenceProfile::with_weight(hap_prefs, uav_prefs, user_weight)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// One score per matched pair, in ascending UAV id order.
    pub per_match_scores: Vec<f64>,
    /// `None` when nothing is matched.
    pub mean_score: Option<f64>,
    pub matched_count: usize,
    pub unmatched_uavs: usize,
}

/// Scores each matched pair with [`hap_preference_key`] and averages.
/// Lower is better.
pub fn score_matching(
    matching: &Matching,
    matrix: &PathLossMatrix,
    served_users: &[u32],
    user_weight: f64,
) -> Result<ScoreReport> {
    if matching.n_haps() != matrix.n_haps() || matching.m_uavs() != matrix.m_uavs() {
        return Err(Error::Invalid(format!(
            "matching is {}x{} but matrix is {}x{}",
            matching.n_haps(),
            matching.m_uavs(),
            matrix.n_haps(),
            matrix.m_uavs()
        )));
    }
    if served_users.len() != matrix.m_uavs() {
        return Err(Error::Invalid("served-user counts do not match UAV count".into()));
    }
    let per_match_scores: Vec<f64> = matching
        .pairs()
        .map(|(h, u)| hap_preference_key(matrix.loss(h, u), served_users[u.index()], user_weight))
        .collect();
    let matched_count = per_match_scores.len();
    let mean_score = (matched_count > 0).then(|| per_match_scores.iter().sum::<f64>() / matched_count as f64);
    Ok(ScoreReport {
        per_match_scores,
        mean_score,
        matched_count,
        unmatched_uavs: matching.m_uavs() - matched_count,
    })
}
