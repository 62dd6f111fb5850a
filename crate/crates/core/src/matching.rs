//! Many-to-one matching between HAPs (with antenna capacity) and UAVs.
//!
//! [`gale_shapley`] runs HAP-proposing deferred acceptance. A HAP with a
//! free antenna offers a link to the next UAV on its list; a free UAV
//! accepts, a matched UAV keeps whichever of the two HAPs it ranks higher.
//! The loop ends once every HAP is full or has proposed to every UAV.

use std::collections::VecDeque;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{HapId, UavId};
use crate::prefscore::PreferenceProfile;

/// Partial assignment UAV → HAP with per-HAP load counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "MatchingFile", try_from = "MatchingFile")]
pub struct Matching {
    hap_of: Vec<Option<HapId>>,
    loads: Vec<u32>,
}

impl Matching {
    pub fn empty(n_haps: usize, m_uavs: usize) -> Self {
        Matching {
            hap_of: vec![None; m_uavs],
            loads: vec![0; n_haps],
        }
    }

    pub fn n_haps(&self) -> usize {
        self.loads.len()
    }

    pub fn m_uavs(&self) -> usize {
        self.hap_of.len()
    }

    pub fn hap_of(&self, u: UavId) -> Option<HapId> {
        self.hap_of[u.index()]
    }

    pub fn load(&self, h: HapId) -> u32 {
        self.loads[h.index()]
    }

    pub fn loads(&self) -> &[u32] {
        &self.loads
    }

    /// Number of matched UAVs.
    pub fn len(&self) -> usize {
        self.hap_of.iter().filter(|h| h.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Matched `(hap, uav)` pairs in ascending UAV order.
    pub fn pairs(&self) -> impl Iterator<Item = (HapId, UavId)> + '_ {
        self.hap_of
            .iter()
            .enumerate()
            .filter_map(|(u, h)| h.map(|h| (h, UavId(u as u32))))
    }

    pub fn uavs_of(&self, h: HapId) -> Vec<UavId> {
        self.pairs().filter(|&(x, _)| x == h).map(|(_, u)| u).collect()
    }

    /// Assigns `u` to `h`, returning its previous HAP. Does not check capacity.
    pub fn assign(&mut self, u: UavId, h: HapId) -> Option<HapId> {
        let prev = self.hap_of[u.index()].replace(h);
        if let Some(p) = prev {
            self.loads[p.index()] -= 1;
        }
        self.loads[h.index()] += 1;
        prev
    }

    pub fn unassign(&mut self, u: UavId) -> Option<HapId> {
        let prev = self.hap_of[u.index()].take();
        if let Some(p) = prev {
            self.loads[p.index()] -= 1;
        }
        prev
    }

    /// Checks dimensions and that no HAP exceeds its capacity.
    pub fn validate(&self, capacities: &[u32]) -> Result<()> {
        if capacities.len() != self.n_haps() {
            return Err(Error::Invalid(format!(
                "matching covers {} HAPs but {} capacities were given",
                self.n_haps(),
                capacities.len()
            )));
        }
        for (h, (&load, &cap)) in self.loads.iter().zip(capacities).enumerate() {
            if load > cap {
                return Err(Error::Invalid(format!(
                    "HAP {h} holds {load} UAVs but has capacity {cap}"
                )));
            }
        }
        Ok(())
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("matching serialization is infallible");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// On-disk form: `{"n_haps", "m_uavs", "pairs": [{"hap", "uav"}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatchingFile {
    n_haps: usize,
    m_uavs: usize,
    pairs: Vec<PairEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PairEntry {
    hap: HapId,
    uav: UavId,
}

impl From<Matching> for MatchingFile {
    fn from(m: Matching) -> Self {
        MatchingFile {
            n_haps: m.n_haps(),
            m_uavs: m.m_uavs(),
            pairs: m.pairs().map(|(hap, uav)| PairEntry { hap, uav }).collect(),
        }
    }
}

impl TryFrom<MatchingFile> for Matching {
    type Error = String;

    fn try_from(f: MatchingFile) -> std::result::Result<Self, String> {
        let mut m = Matching::empty(f.n_haps, f.m_uavs);
        for p in f.pairs {
            if p.hap.index() >= f.n_haps || p.uav.index() >= f.m_uavs {
                return Err(format!("pair ({}, {}) out of range", p.hap.0, p.uav.0));
            }
            if m.hap_of(p.uav).is_some() {
                return Err(format!("UAV {} matched more than once", p.uav.0));
            }
            m.assign(p.uav, p.hap);
        }
        Ok(m)
    }
}

/// One step of the deferred-acceptance loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    Propose {
        hap: HapId,
        uav: UavId,
    },
    /// A free UAV took the offer.
    Accept {
        hap: HapId,
        uav: UavId,
    },
    Reject {
        hap: HapId,
        uav: UavId,
    },
    /// The UAV dropped `old` for `new`.
    Swap {
        uav: UavId,
        old: HapId,
        new: HapId,
    },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TraceEvent::Propose { hap, uav } => write!(f, "PROPOSE {} {}", hap.0, uav.0),
            TraceEvent::Accept { hap, uav } => write!(f, "ACCEPT {} {}", hap.0, uav.0),
            TraceEvent::Reject { hap, uav } => write!(f, "REJECT {} {}", hap.0, uav.0),
            TraceEvent::Swap { uav, old, new } => write!(f, "SWAP {} {} {}", uav.0, old.0, new.0),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub proposals: u64,
    pub accepts: u64,
    pub rejections: u64,
    pub swaps: u64,
}

fn check_capacities(profile: &PreferenceProfile, capacities: &[u32]) -> Result<()> {
    if capacities.len() != profile.n_haps() {
        return Err(Error::Invalid(format!(
            "profile has {} HAPs but {} capacities were given",
            profile.n_haps(),
            capacities.len()
        )));
    }
    if let Some(h) = capacities.iter().position(|&c| c == 0) {
        return Err(Error::Invalid(format!("HAP {h} has zero capacity")));
    }
    Ok(())
}

/// HAP-optimal stable matching.
pub fn gale_shapley(profile: &PreferenceProfile, capacities: &[u32]) -> Result<Matching> {
    gale_shapley_traced(profile, capacities, |_| {}).map(|(m, _)| m)
}

/// [`gale_shapley`] reporting every event to `trace` and returning counters.
///
/// HAPs are served from a FIFO queue seeded in ascending id order; each
/// activation issues a single proposal, and a HAP that still has a free
/// antenna and untried UAVs goes to the back of the queue.
pub fn gale_shapley_traced<F>(
    profile: &PreferenceProfile,
    capacities: &[u32],
    mut trace: F,
) -> Result<(Matching, SolveStats)>
where
    F: FnMut(TraceEvent),
{
    check_capacities(profile, capacities)?;
    let (n, m) = (profile.n_haps(), profile.m_uavs());
    let mut matching = Matching::empty(n, m);
    let mut stats = SolveStats::default();
    let mut next = vec![0usize; n];
    let mut queued = vec![true; n];
    let mut queue: VecDeque<HapId> = (0..n as u32).map(HapId).collect();

    let wants_more =
        |matching: &Matching, next: &[usize], h: HapId| matching.load(h) < capacities[h.index()] && next[h.index()] < m;

    while let Some(h) = queue.pop_front() {
        if !wants_more(&matching, &next, h) {
            queued[h.index()] = false;
            continue;
        }
        let u = profile.hap_list(h)[next[h.index()]];
        next[h.index()] += 1;
        stats.proposals += 1;
        trace(TraceEvent::Propose { hap: h, uav: u });

        match matching.hap_of(u) {
            None => {
                matching.assign(u, h);
                stats.accepts += 1;
                trace(TraceEvent::Accept { hap: h, uav: u });
            }
            Some(current) if profile.uav_rank(u, h) < profile.uav_rank(u, current) => {
                matching.assign(u, h);
                stats.swaps += 1;
                trace(TraceEvent::Swap {
                    uav: u,
                    old: current,
                    new: h,
                });
                if !queued[current.index()] && wants_more(&matching, &next, current) {
                    queued[current.index()] = true;
                    queue.push_back(current);
                }
            }
            Some(_) => {
                stats.rejections += 1;
                trace(TraceEvent::Reject { hap: h, uav: u });
            }
        }
        debug_assert!(matching.load(h) <= capacities[h.index()], "HAP {} over capacity", h.0);

        if wants_more(&matching, &next, h) {
            queue.push_back(h);
        } else {
            queued[h.index()] = false;
        }
    }
    Ok((matching, stats))
}

/// Baseline: UAVs in a uniformly shuffled order, each sent to a uniformly
/// chosen HAP that still has a free antenna.
pub fn random_matching<R: Rng + ?Sized>(rng: &mut R, capacities: &[u32], m_uavs: usize) -> Matching {
    let n = capacities.len();
    let mut matching = Matching::empty(n, m_uavs);
    let mut order: Vec<UavId> = (0..m_uavs as u32).map(UavId).collect();
    order.shuffle(rng);
    let mut open: Vec<HapId> = (0..n as u32).map(HapId).filter(|h| capacities[h.index()] > 0).collect();
    for u in order {
        if open.is_empty() {
            break;
        }
        let slot = rng.random_range(0..open.len());
        let h = open[slot];
        matching.assign(u, h);
        if matching.load(h) == capacities[h.index()] {
            open.swap_remove(slot);
        }
    }
    matching
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UavReason {
    UavUnmatched,
    UavPrefers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HapReason {
    HapHasFreeSlot,
    HapPrefersOverWorst,
}

/// A HAP–UAV pair, not matched together, that would both rather be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingPair {
    pub hap: HapId,
    pub uav: UavId,
    pub uav_reason: UavReason,
    pub hap_reason: HapReason,
}

impl fmt::Display for BlockingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}) {:?} + {:?}",
            self.hap, self.uav, self.uav_reason, self.hap_reason
        )
    }
}

/// Every blocking pair of `matching`, HAP-major. Empty iff stable.
///
/// Panics if the matching, profile and capacities disagree on dimensions;
/// call [`Matching::validate`] first on untrusted input.
pub fn find_blocking_pairs(matching: &Matching, profile: &PreferenceProfile, capacities: &[u32]) -> Vec<BlockingPair> {
    let (n, m) = (profile.n_haps(), profile.m_uavs());
    assert_eq!(matching.n_haps(), n, "matching/profile HAP count mismatch");
    assert_eq!(matching.m_uavs(), m, "matching/profile UAV count mismatch");
    assert_eq!(capacities.len(), n, "capacity count mismatch");

    // Rank of the least-preferred UAV currently held by each HAP.
    let mut worst = vec![0u32; n];
    for (h, u) in matching.pairs() {
        worst[h.index()] = worst[h.index()].max(profile.hap_rank(h, u));
    }

    let mut out = Vec::new();
    for h in (0..n as u32).map(HapId) {
        let has_free = matching.load(h) < capacities[h.index()];
        for u in (0..m as u32).map(UavId) {
            let uav_reason = match matching.hap_of(u) {
                Some(cur) if cur == h => continue,
                None => UavReason::UavUnmatched,
                Some(cur) if profile.uav_rank(u, h) < profile.uav_rank(u, cur) => UavReason::UavPrefers,
                Some(_) => continue,
            };
            let hap_reason = if has_free {
                HapReason::HapHasFreeSlot
            } else if matching.load(h) > 0 && profile.hap_rank(h, u) < worst[h.index()] {
                HapReason::HapPrefersOverWorst
            } else {
                continue;
            };
            out.push(BlockingPair {
                hap: h,
                uav: u,
                uav_reason,
                hap_reason,
            });
        }
    }
    out
}

pub const ENUMERATION_MAX_CAPACITY: u32 = 8;
pub const ENUMERATION_MAX_UAVS: usize = 8;

/// All stable matchings of a small instance, by exhaustive search.
///
/// Enumerates every capacity-respecting assignment matching exactly
/// `min(Σ capacities, m_uavs)` UAVs and keeps those without blocking pairs.
/// Refuses instances with `Σ capacities > 8` or `m_uavs > 8`.
pub fn enumerate_stable_matchings(profile: &PreferenceProfile, capacities: &[u32]) -> Result<Vec<Matching>> {
    check_capacities(profile, capacities)?;
    let total: u32 = capacities.iter().sum();
    let m = profile.m_uavs();
    if total > ENUMERATION_MAX_CAPACITY || m > ENUMERATION_MAX_UAVS {
        return Err(Error::TooLarge(format!(
            "total capacity {total} (max {ENUMERATION_MAX_CAPACITY}), {m} UAVs (max {ENUMERATION_MAX_UAVS})"
        )));
    }
    let target = (total as usize).min(m);

    struct Search<'a> {
        profile: &'a PreferenceProfile,
        capacities: &'a [u32],
        skips_allowed: usize,
        found: Vec<Matching>,
    }

    impl Search<'_> {
        fn visit(&mut self, current: &mut Matching, u: usize, skipped: usize) {
            if u == current.m_uavs() {
                if find_blocking_pairs(current, self.profile, self.capacities).is_empty() {
                    self.found.push(current.clone());
                }
                return;
            }
            let uav = UavId(u as u32);
            for h in (0..self.capacities.len() as u32).map(HapId) {
                if current.load(h) < self.capacities[h.index()] {
                    current.assign(uav, h);
                    self.visit(current, u + 1, skipped);
                    current.unassign(uav);
                }
            }
            if skipped < self.skips_allowed {
                self.visit(current, u + 1, skipped + 1);
            }
        }
    }

    let mut search = Search {
        profile,
        capacities,
        skips_allowed: m - target,
        found: Vec::new(),
    };
    search.visit(&mut Matching::empty(capacities.len(), m), 0, 0);
    Ok(search.found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn lists(haps: &[&[u32]], uavs: &[&[u32]]) -> PreferenceProfile {
        PreferenceProfile::from_lists(
            haps.iter().map(|l| l.iter().map(|&u| UavId(u)).collect()).collect(),
            uavs.iter().map(|l| l.iter().map(|&h| HapId(h)).collect()).collect(),
        )
        .unwrap()
    }

    /// h0:[u0,u1], h1:[u0,u1], u0:[h1,h0], u1:[h0,h1]
    fn contested() -> PreferenceProfile {
        lists(&[&[0, 1], &[0, 1]], &[&[1, 0], &[0, 1]])
    }

    fn pairs(m: &Matching) -> Vec<(u32, u32)> {
        m.pairs().map(|(h, u)| (h.0, u.0)).collect()
    }

    #[test]
    fn single_pair() {
        let p = lists(&[&[0]], &[&[0]]);
        let m = gale_shapley(&p, &[1]).unwrap();
        assert_eq!(pairs(&m), vec![(0, 0)]);
    }

    #[test]
    fn capacity_absorbs_both() {
        let p = lists(&[&[1, 0]], &[&[0], &[0]]);
        let m = gale_shapley(&p, &[2]).unwrap();
        assert_eq!(pairs(&m), vec![(0, 0), (0, 1)]);
    }

    #[test]
    fn contested_instance() {
        let m = gale_shapley(&contested(), &[1, 1]).unwrap();
        // (h1,u0) and (h0,u1)
        assert_eq!(pairs(&m), vec![(1, 0), (0, 1)]);
    }

    #[test]
    fn contested_trace() {
        let mut log = Vec::new();
        let (_, stats) = gale_shapley_traced(&contested(), &[1, 1], |e| log.push(e.to_string())).unwrap();
        assert_eq!(
            log,
            vec![
                "PROPOSE 0 0",
                "ACCEPT 0 0",
                "PROPOSE 1 0",
                "SWAP 0 0 1",
                "PROPOSE 0 1",
                "ACCEPT 0 1",
            ]
        );
        assert_eq!(stats.proposals, 3);
        assert_eq!(stats.swaps, 1);
    }

    #[test]
    fn rejects_malformed_capacities() {
        assert!(gale_shapley(&contested(), &[1]).is_err());
        assert!(gale_shapley(&contested(), &[1, 0]).is_err());
    }

    #[test]
    fn blocking_pairs_of_the_other_matching() {
        let mut m = Matching::empty(2, 2);
        m.assign(UavId(0), HapId(0));
        m.assign(UavId(1), HapId(1));
        let bp = find_blocking_pairs(&m, &contested(), &[1, 1]);
        assert_eq!(
            bp,
            vec![BlockingPair {
                hap: HapId(1),
                uav: UavId(0),
                uav_reason: UavReason::UavPrefers,
                hap_reason: HapReason::HapPrefersOverWorst,
            }]
        );
    }

    #[test]
    fn empty_matching_is_blocked_everywhere() {
        let bp = find_blocking_pairs(&Matching::empty(2, 2), &contested(), &[1, 1]);
        assert_eq!(bp.len(), 4);
        assert!(bp
            .iter()
            .all(|b| b.uav_reason == UavReason::UavUnmatched && b.hap_reason == HapReason::HapHasFreeSlot));
    }

    #[test]
    fn enumeration_small_cases() {
        let one = enumerate_stable_matchings(&lists(&[&[0]], &[&[0]]), &[1]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(pairs(&one[0]), vec![(0, 0)]);

        let all = enumerate_stable_matchings(&contested(), &[1, 1]).unwrap();
        assert_eq!(all, vec![gale_shapley(&contested(), &[1, 1]).unwrap()]);
    }

    #[test]
    fn enumeration_guard() {
        let p = lists(&[&[0]], &[&[0]]);
        assert!(matches!(enumerate_stable_matchings(&p, &[9]), Err(Error::TooLarge(_))));
        let nine: Vec<Vec<HapId>> = (0..9).map(|_| vec![HapId(0)]).collect();
        let p = PreferenceProfile::from_lists(vec![(0..9).map(UavId).collect()], nine).unwrap();
        assert!(matches!(enumerate_stable_matchings(&p, &[1]), Err(Error::TooLarge(_))));
    }

    #[test]
    fn random_matching_examples() {
        for seed in 0..10 {
            let m = random_matching(&mut stream(seed, 2), &[1], 1);
            assert_eq!(pairs(&m), vec![(0, 0)]);
        }
        let m = random_matching(&mut stream(3, 2), &[2, 3], 10);
        assert_eq!(m.len(), 5);
        m.validate(&[2, 3]).unwrap();
        let a = random_matching(&mut stream(77, 2), &[5; 10], 60);
        let b = random_matching(&mut stream(77, 2), &[5; 10], 60);
        assert_eq!(a, b);
        assert_ne!(a, random_matching(&mut stream(78, 2), &[5; 10], 60));
    }

    #[test]
    fn matching_file_round_trip_and_rejects_duplicates() {
        let m = gale_shapley(&contested(), &[1, 1]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(
            text,
            r#"{"n_haps":2,"m_uavs":2,"pairs":[{"hap":1,"uav":0},{"hap":0,"uav":1}]}"#
        );
        assert_eq!(serde_json::from_str::<Matching>(&text).unwrap(), m);

        let dup = r#"{"n_haps":2,"m_uavs":2,"pairs":[{"hap":1,"uav":0},{"hap":0,"uav":0}]}"#;
        assert!(serde_json::from_str::<Matching>(dup).is_err());
        let oob = r#"{"n_haps":2,"m_uavs":2,"pairs":[{"hap":2,"uav":0}]}"#;
        assert!(serde_json::from_str::<Matching>(oob).is_err());
    }

    #[test]
    fn validate_detects_overload() {
        let mut m = Matching::empty(1, 2);
        m.assign(UavId(0), HapId(0));
        m.assign(UavId(1), HapId(0));
        assert!(m.validate(&[1]).is_err());
        assert!(m.validate(&[2]).is_ok());
        assert!(m.validate(&[2, 2]).is_err());
    }
}
