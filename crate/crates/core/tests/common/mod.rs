#![allow(dead_code)]

use hapmatch_core::rng::stream;
use hapmatch_core::{HapId, Matching, PreferenceProfile, UavId};
use rand::seq::SliceRandom;
use rand::Rng;

pub struct Instance {
    pub profile: PreferenceProfile,
    pub capacities: Vec<u32>,
}

fn random_profile<R: Rng>(rng: &mut R, n: usize, m: usize) -> PreferenceProfile {
    let hap_prefs = (0..n)
        .map(|_| {
            let mut l: Vec<UavId> = (0..m as u32).map(UavId).collect();
            l.shuffle(rng);
            l
        })
        .collect();
    let uav_prefs = (0..m)
        .map(|_| {
            let mut l: Vec<HapId> = (0..n as u32).map(HapId).collect();
            l.shuffle(rng);
            l
        })
        .collect();
    PreferenceProfile::from_lists(hap_prefs, uav_prefs).unwrap()
}

/// n ≤ 20 HAPs with capacity ≤ 5, m ≤ 50 UAVs, uniform random strict lists.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = stream(seed, 0);
    let n = rng.random_range(1..=20);
    let m = rng.random_range(1..=50);
    let capacities = (0..n).map(|_| rng.random_range(1..=5)).collect();
    Instance {
        profile: random_profile(&mut rng, n, m),
        capacities,
    }
}

/// Instance inside the exhaustive-enumeration guard: Σ capacity ≤ 8, m ≤ 8.
pub fn small_instance(seed: u64) -> Instance {
    let mut rng = stream(seed, 0);
    let n = rng.random_range(1..=4);
    let mut used = 0u32;
    let capacities: Vec<u32> = (0..n)
        .map(|i| {
            let reserved = (n - i - 1) as u32;
            let c = rng.random_range(1..=(8 - used - reserved).min(4));
            used += c;
            c
        })
        .collect();
    assert!(capacities.iter().sum::<u32>() <= 8, "{capacities:?}");
    let m = rng.random_range(1..=8);
    Instance {
        profile: random_profile(&mut rng, n, m),
        capacities,
    }
}

/// True when every HAP does at least as well in `a` as in `b`, comparing
/// its assigned UAVs slot by slot after sorting each set by its ranking.
pub fn hap_weakly_better(profile: &PreferenceProfile, a: &Matching, b: &Matching) -> bool {
    (0..profile.n_haps() as u32).map(HapId).all(|h| {
        let ranks = |m: &Matching| {
            let mut r: Vec<u32> = m.uavs_of(h).into_iter().map(|u| profile.hap_rank(h, u)).collect();
            r.sort_unstable();
            r
        };
        let (ra, rb) = (ranks(a), ranks(b));
        ra.len() >= rb.len() && ra.iter().zip(&rb).all(|(x, y)| x <= y)
    })
}
