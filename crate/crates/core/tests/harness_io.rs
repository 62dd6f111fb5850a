use std::fs;

use hapmatch_core::harness::{ExperimentSection, ScenarioSection, SweepPoint, RESULTS_CSV_HEADER};
use hapmatch_core::{execute, run_experiment, Error, ExperimentConfig};

fn config(out: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        scenario: ScenarioSection {
            sweep: vec![
                SweepPoint { n_haps: 5, m_uavs: 25 },
                SweepPoint { n_haps: 10, m_uavs: 50 },
            ],
            ..Default::default()
        },
        experiment: ExperimentSection {
            trials_per_point: 4,
            master_seed: 77,
            output_path: out.to_path_buf(),
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn writes_results_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let result = run_experiment(&config(&out)).unwrap();

    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv, result.csv_string());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(RESULTS_CSV_HEADER));
    assert_eq!(lines.count(), 8);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["points"].as_array().unwrap().len(), 2);
    assert_eq!(summary["points"][1]["n_haps"], 10);
    assert!(summary["points"][0]["score_gap"]["mean"].is_f64());
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_experiment(&config(&dir.path().join("a"))).unwrap();
    let b = run_experiment(&config(&dir.path().join("b"))).unwrap();
    assert_eq!(
        fs::read(dir.path().join("a/results.csv")).unwrap(),
        fs::read(dir.path().join("b/results.csv")).unwrap()
    );
    assert_eq!(a.summary, b.summary);
}

#[test]
fn adding_trials_keeps_earlier_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    let short = execute(&cfg).unwrap();
    cfg.experiment.trials_per_point = 6;
    let long = execute(&cfg).unwrap();
    for t in &short.trials {
        let same = long
            .trials
            .iter()
            .find(|l| l.sweep_point == t.sweep_point && l.trial_index == t.trial_index)
            .unwrap();
        assert_eq!(same.seed, t.seed);
        assert_eq!(same.metrics.gs_mean_score, t.metrics.gs_mean_score);
    }
}

#[test]
fn score_gap_identity_holds_on_every_row() {
    let dir = tempfile::tempdir().unwrap();
    for t in execute(&config(dir.path())).unwrap().trials {
        let m = &t.metrics;
        assert!((m.score_gap - (m.random_mean_score - m.gs_mean_score)).abs() <= 1e-12);
        assert_eq!(m.gs_matched_count, t.m_uavs);
    }
}

#[test]
fn unwritable_output_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let err = run_experiment(&config(&blocker.join("sub"))).unwrap_err();
    assert!(matches!(err, Error::Io { .. }), "{err}");
}

#[test]
fn runtime_columns_filled_when_enabled() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.experiment.record_runtime = true;
    let csv = execute(&cfg).unwrap().csv_string();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert!(row[8].parse::<f64>().unwrap() >= 0.0);
    assert!(row[9].parse::<f64>().unwrap() >= 0.0);
}

#[test]
fn trace_files_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.experiment.trace = true;
    run_experiment(&cfg).unwrap();
    let log = fs::read_to_string(dir.path().join("trace_point0_trial0.log")).unwrap();
    assert!(log.lines().next().unwrap().starts_with("PROPOSE "));
    assert!(log.lines().all(|l| ["PROPOSE ", "ACCEPT ", "REJECT ", "SWAP "]
        .iter()
        .any(|p| l.starts_with(p))));
}

#[test]
fn shipped_default_config_equals_builtin_defaults() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.json");
    assert_eq!(ExperimentConfig::load(path).unwrap(), ExperimentConfig::default());
}
