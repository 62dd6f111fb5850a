//! Fixtures shared by the criterion benchmarks in `benches/`.

use hapmatch_core::rng::{stream, CHANNEL_STREAM};
use hapmatch_core::{
    build_path_loss_matrix, build_preferences, generate_scenario, ChannelParams, PathLossMatrix, PreferenceProfile,
    Scenario, ScenarioConfig,
};

pub struct Fixture {
    pub scenario: Scenario,
    pub matrix: PathLossMatrix,
    pub profile: PreferenceProfile,
    pub capacities: Vec<u32>,
}

/// A default-parameter instance with `n_haps` HAPs and five UAVs per HAP.
pub fn fixture(n_haps: usize, seed: u64) -> Fixture {
    let scenario = generate_scenario(&ScenarioConfig {
        n_haps,
        m_uavs: 5 * n_haps,
        seed,
        ..Default::default()
    })
    .expect("valid default config");
    let matrix = build_path_loss_matrix(&scenario, &ChannelParams::default(), &mut stream(seed, CHANNEL_STREAM))
        .expect("generated scenarios have no coincident agents");
    let profile = build_preferences(&matrix, &scenario.served_users(), 1.0).expect("dimensions agree");
    let capacities = scenario.capacities();
    Fixture {
        scenario,
        matrix,
        profile,
        capacities,
    }
}
