//! Monte-Carlo comparison of Gale-Shapley against the random baseline.
//!
//! Each trial draws a fresh topology and channel from its own seed, solves
//! both matchings on the same loss matrix and scores them with the same
//! key. Trial seeds come from [`crate::rng::trial_seed`], so results do not
//! depend on how many trials or points run alongside.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{build_path_loss_matrix, ChannelParams};
use crate::error::{Error, Result};
use crate::geo::Scenario;
use crate::matching::{find_blocking_pairs, gale_shapley_traced, random_matching, SolveStats};
use crate::prefscore::{build_preferences, score_matching, DEFAULT_USER_WEIGHT_DB};
use crate::rng::{stream, trial_seed, BASELINE_STREAM, CHANNEL_STREAM};
use crate::scenario::{generate_scenario, ScenarioConfig};

pub const RESULTS_CSV_HEADER: &str =
    "sweep_point,n_haps,m_uavs,trial,gs_mean_score,random_mean_score,score_gap,gs_matched,gs_runtime_ms,random_runtime_ms";
pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DEFAULT_TRIALS_PER_POINT: usize = 30;
pub const DEFAULT_MASTER_SEED: u64 = 2022;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n_haps: usize,
    pub m_uavs: usize,
}

/// Topology parameters shared by every sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub hap_capacity: u32,
    pub area_side_km: f64,
    pub hap_alt_range_km: [f64; 2],
    pub uav_alt_range_km: [f64; 2],
    pub users_range: [u32; 2],
    pub sweep: Vec<SweepPoint>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let base = ScenarioConfig::default();
        ScenarioSection {
            hap_capacity: base.hap_capacity,
            area_side_km: base.area_side_km,
            hap_alt_range_km: base.hap_alt_range_km,
            uav_alt_range_km: base.uav_alt_range_km,
            users_range: base.users_range,
            sweep: default_sweep(),
        }
    }
}

/// 100..=500 HAPs in steps of 100 with five UAVs per HAP, so total antenna
/// capacity equals the UAV count at every point.
pub fn default_sweep() -> Vec<SweepPoint> {
    (1..=5)
        .map(|k| SweepPoint {
            n_haps: 100 * k,
            m_uavs: 500 * k,
        })
        .collect()
}

impl ScenarioSection {
    pub fn config_for(&self, point: SweepPoint, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            n_haps: point.n_haps,
            m_uavs: point.m_uavs,
            hap_capacity: self.hap_capacity,
            area_side_km: self.area_side_km,
            hap_alt_range_km: self.hap_alt_range_km,
            uav_alt_range_km: self.uav_alt_range_km,
            users_range: self.users_range,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub user_weight_db_per_user: f64,
    pub trials_per_point: usize,
    pub master_seed: u64,
    /// Output directory for `results.csv` and `summary.json`.
    pub output_path: PathBuf,
    /// Fill the runtime columns. Off by default because wall-clock times
    /// make the results file differ between otherwise identical runs.
    pub record_runtime: bool,
    /// Write the Gale-Shapley event log of trial 0 at each sweep point.
    pub trace: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            user_weight_db_per_user: DEFAULT_USER_WEIGHT_DB,
            trials_per_point: DEFAULT_TRIALS_PER_POINT,
            master_seed: DEFAULT_MASTER_SEED,
            output_path: PathBuf::from("results"),
            record_runtime: false,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSection,
    pub channel: ChannelParams,
    pub experiment: ExperimentSection,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is infallible")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::parse(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        let exp = &self.experiment;
        if exp.trials_per_point == 0 {
            return Err(Error::Invalid("trials_per_point must be >= 1".into()));
        }
        if !(exp.user_weight_db_per_user.is_finite() && exp.user_weight_db_per_user >= 0.0) {
            return Err(Error::Invalid("user_weight_db_per_user must be finite and >= 0".into()));
        }
        let sweep = &self.scenario.sweep;
        if sweep.is_empty() {
            return Err(Error::Invalid("sweep needs at least one point".into()));
        }
        for w in sweep.windows(2) {
            if !(w[1].n_haps > w[0].n_haps && w[1].m_uavs > w[0].m_uavs) {
                return Err(Error::Invalid(format!(
                    "sweep points must strictly increase in both counts: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        if sweep.len() > u32::MAX as usize || exp.trials_per_point > u32::MAX as usize {
            return Err(Error::Invalid("sweep or trial count exceeds 32 bits".into()));
        }
        for &p in sweep {
            self.scenario.config_for(p, 0).validate()?;
        }
        Ok(())
    }
}

/// Outcome of one GS-versus-random comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub gs_mean_score: f64,
    pub random_mean_score: f64,
    /// `random_mean_score - gs_mean_score`; positive when GS is better.
    pub score_gap: f64,
    pub gs_matched_count: usize,
    pub random_matched_count: usize,
    pub gs_proposals: u64,
    pub gs_runtime_ms: f64,
    pub random_runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub sweep_point: usize,
    pub n_haps: usize,
    pub m_uavs: usize,
    pub trial_index: usize,
    pub seed: u64,
    pub metrics: TrialMetrics,
}

/// Solves one scenario with both algorithms on a shared channel draw.
pub fn run_trial(
    scenario: &Scenario,
    channel: &ChannelParams,
    user_weight: f64,
    trial_seed: u64,
) -> Result<TrialMetrics> {
    run_trial_traced(scenario, channel, user_weight, trial_seed, None)
}

/// [`run_trial`], optionally writing the GS event log one line per event.
pub fn run_trial_traced(
    scenario: &Scenario,
    channel: &ChannelParams,
    user_weight: f64,
    trial_seed: u64,
    mut trace: Option<&mut dyn Write>,
) -> Result<TrialMetrics> {
    scenario.validate()?;
    let matrix = build_path_loss_matrix(scenario, channel, &mut stream(trial_seed, CHANNEL_STREAM))?;
    let users = scenario.served_users();
    let capacities = scenario.capacities();
    let profile = build_preferences(&matrix, &users, user_weight)?;

    let started = Instant::now();
    let mut trace_err: Option<io::Error> = None;
    let (gs, stats): (_, SolveStats) = gale_shapley_traced(&profile, &capacities, |ev| {
        if let Some(w) = trace.as_mut() {
            if trace_err.is_none() {
                if let Err(e) = writeln!(w, "{ev}") {
                    trace_err = Some(e);
                }
            }
        }
    })?;
    let gs_runtime = started.elapsed();
    if let Some(e) = trace_err {
        return Err(Error::io("<trace>", e));
    }

    let blocking = find_blocking_pairs(&gs, &profile, &capacities);
    if !blocking.is_empty() {
        return Err(Error::Unstable {
            seed: trial_seed,
            pairs: blocking.len(),
        });
    }

    let started = Instant::now();
    let random = random_matching(&mut stream(trial_seed, BASELINE_STREAM), &capacities, scenario.m_uavs());
    let random_runtime = started.elapsed();

    let gs_report = score_matching(&gs, &matrix, &users, user_weight)?;
    let random_report = score_matching(&random, &matrix, &users, user_weight)?;
    let (Some(gs_mean), Some(random_mean)) = (gs_report.mean_score, random_report.mean_score) else {
        return Err(Error::Invalid("a matching came back empty".into()));
    };

    Ok(TrialMetrics {
        gs_mean_score: gs_mean,
        random_mean_score: random_mean,
        score_gap: random_mean - gs_mean,
        gs_matched_count: gs_report.matched_count,
        random_matched_count: random_report.matched_count,
        gs_proposals: stats.proposals,
        gs_runtime_ms: gs_runtime.as_secs_f64() * 1e3,
        random_runtime_ms: random_runtime.as_secs_f64() * 1e3,
    })
}

/// Mean and spread of one quantity over the trials of a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for a single trial.
    pub std: f64,
    /// `std / sqrt(n)`.
    pub std_err: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Moments {
            mean,
            std,
            std_err: std / n.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub sweep_point: usize,
    pub n_haps: usize,
    pub m_uavs: usize,
    pub trials: usize,
    pub gs_mean_score: Moments,
    pub random_mean_score: Moments,
    pub score_gap: Moments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub master_seed: u64,
    pub trials_per_point: usize,
    pub user_weight_db_per_user: f64,
    pub channel: ChannelParams,
    pub points: Vec<PointSummary>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub trials: Vec<TrialResult>,
    pub summary: ExperimentSummary,
    record_runtime: bool,
}

impl ExperimentOutput {
    /// Results table, one row per trial ordered by (sweep point, trial).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{RESULTS_CSV_HEADER}")?;
        for t in &self.trials {
            let m = &t.metrics;
            write!(
                out,
                "{},{},{},{},{:.6},{:.6},{:.6},{},",
                t.sweep_point,
                t.n_haps,
                t.m_uavs,
                t.trial_index,
                m.gs_mean_score,
                m.random_mean_score,
                m.score_gap,
                m.gs_matched_count
            )?;
            if self.record_runtime {
                writeln!(out, "{:.6},{:.6}", m.gs_runtime_ms, m.random_runtime_ms)?;
            } else {
                writeln!(out, ",")?;
            }
        }
        out.flush()
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// Runs every trial of every sweep point in memory. Trials run on the rayon
/// pool; output order is fixed regardless of completion order.
pub fn execute(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let exp = &config.experiment;
    let jobs: Vec<(usize, SweepPoint, usize)> = config
        .scenario
        .sweep
        .iter()
        .enumerate()
        .flat_map(|(p, &point)| (0..exp.trials_per_point).map(move |t| (p, point, t)))
        .collect();

    let trials = jobs
        .into_par_iter()
        .map(|(p, point, t)| {
            let seed = trial_seed(exp.master_seed, p as u32, t as u32);
            let scenario = generate_scenario(&config.scenario.config_for(point, seed))?;
            let metrics = run_trial(&scenario, &config.channel, exp.user_weight_db_per_user, seed)?;
            Ok(TrialResult {
                sweep_point: p,
                n_haps: point.n_haps,
                m_uavs: point.m_uavs,
                trial_index: t,
                seed,
                metrics,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let points = config
        .scenario
        .sweep
        .iter()
        .enumerate()
        .map(|(p, point)| {
            let rows: Vec<&TrialMetrics> = trials
                .iter()
                .filter(|t| t.sweep_point == p)
                .map(|t| &t.metrics)
                .collect();
            let col = |f: fn(&TrialMetrics) -> f64| rows.iter().map(|m| f(m)).collect::<Vec<_>>();
            PointSummary {
                sweep_point: p,
                n_haps: point.n_haps,
                m_uavs: point.m_uavs,
                trials: rows.len(),
                gs_mean_score: Moments::of(&col(|m| m.gs_mean_score)),
                random_mean_score: Moments::of(&col(|m| m.random_mean_score)),
                score_gap: Moments::of(&col(|m| m.score_gap)),
            }
        })
        .collect();

    let mut notes = vec![
        "scores are loss_db - w * served_users averaged over matched pairs; lower is better".to_string(),
        "score_gap = random_mean_score - gs_mean_score".to_string(),
    ];
    if exp.trials_per_point == DEFAULT_TRIALS_PER_POINT {
        notes.push(format!(
            "trials_per_point = {DEFAULT_TRIALS_PER_POINT} is the built-in default, not a calibrated value"
        ));
    }

    Ok(ExperimentOutput {
        trials,
        summary: ExperimentSummary {
            master_seed: exp.master_seed,
            trials_per_point: exp.trials_per_point,
            user_weight_db_per_user: exp.user_weight_db_per_user,
            channel: config.channel.clone(),
            points,
            notes,
        },
        record_runtime: exp.record_runtime,
    })
}

/// [`execute`] plus output files in `config.experiment.output_path`.
///
/// The output directory and results file are created before any trial
/// runs, so a bad path fails fast.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let dir = &config.experiment.output_path;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(RESULTS_FILE);
    let csv_file = File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;

    let output = execute(config)?;

    output
        .write_csv(BufWriter::new(csv_file))
        .map_err(|e| Error::io(&csv_path, e))?;
    let summary_path = dir.join(SUMMARY_FILE);
    let summary = serde_json::to_string_pretty(&output.summary).expect("summary serialization is infallible");
    fs::write(&summary_path, summary + "\n").map_err(|e| Error::io(&summary_path, e))?;

    if config.experiment.trace {
        write_traces(config, dir)?;
    }
    Ok(output)
}

fn write_traces(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let exp = &config.experiment;
    for (p, &point) in config.scenario.sweep.iter().enumerate() {
        let seed = trial_seed(exp.master_seed, p as u32, 0);
        let scenario = generate_scenario(&config.scenario.config_for(point, seed))?;
        let path = dir.join(format!("trace_point{p}_trial0.log"));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        run_trial_traced(
            &scenario,
            &config.channel,
            exp.user_weight_db_per_user,
            seed,
            Some(&mut w),
        )?;
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
