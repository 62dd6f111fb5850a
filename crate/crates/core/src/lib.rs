//! Stable matching between high-altitude platforms (HAPs) and UAVs.
//!
//! The pipeline runs scenario generation ([`scenario`]), link budget
//! ([`channel`]), preference construction and scoring ([`prefscore`]),
//! capacity-constrained deferred acceptance plus a random baseline
//! ([`matching`]), and Monte-Carlo experiments ([`harness`]).

pub mod channel;
pub mod error;
pub mod geo;
pub mod harness;
pub mod matching;
pub mod prefscore;
pub mod rng;
pub mod scenario;

pub use channel::{build_path_loss_matrix, ChannelParams, PathLossMatrix};
pub use error::{Error, Result};
pub use geo::{distance_3d, GeoPoint, Hap, HapId, Scenario, Uav, UavId};
pub use harness::{execute, run_experiment, run_trial, ExperimentConfig, ExperimentOutput, TrialMetrics, TrialResult};
pub use matching::{
    enumerate_stable_matchings, find_blocking_pairs, gale_shapley, gale_shapley_traced, random_matching, BlockingPair,
    Matching, SolveStats, TraceEvent,
};
pub use prefscore::{build_preferences, hap_preference_key, score_matching, PreferenceProfile, ScoreReport};
pub use scenario::{generate_scenario, ScenarioConfig};
