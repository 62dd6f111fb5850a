use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hapmatch_core::harness::SUMMARY_FILE;
use hapmatch_core::prefscore::DEFAULT_USER_WEIGHT_DB;
use hapmatch_core::rng::{stream, BASELINE_STREAM, CHANNEL_STREAM};
use hapmatch_core::{
    build_path_loss_matrix, build_preferences, find_blocking_pairs, gale_shapley_traced, generate_scenario,
    random_matching, run_experiment, score_matching, ChannelParams, Error, ExperimentConfig, Matching, PathLossMatrix,
    PreferenceProfile, Scenario, ScenarioConfig,
};

const EXIT_UNSTABLE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "hapmatch", version, about = "HAP-UAV stable matching simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Gale-Shapley vs random Monte-Carlo sweep.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides experiment.output_path).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the GS event log of trial 0 at each sweep point.
        #[arg(long)]
        trace: bool,
        /// Fill the runtime columns of results.csv.
        #[arg(long)]
        timing: bool,
    },
    /// Generate one scenario from a scenario config.
    GenScenario {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Dump the path-loss matrix of a scenario as CSV.
    Pathloss {
        #[arg(long)]
        scenario: PathBuf,
        /// Channel parameters; defaults when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Match a scenario and write the matching file.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_USER_WEIGHT_DB)]
        user_weight: f64,
        #[arg(long, value_enum, default_value_t = Algorithm::GaleShapley)]
        algorithm: Algorithm,
        #[arg(long)]
        out: PathBuf,
        /// Print the GS event log to stdout.
        #[arg(long)]
        trace: bool,
    },
    /// Check a matching for blocking pairs; exit code 0 iff stable.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        matching: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_USER_WEIGHT_DB)]
        user_weight: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    GaleShapley,
    Random,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::Unstable { .. } => EXIT_INTERNAL,
        Error::Domain(_) | Error::Invalid(_) | Error::TooLarge(_) | Error::Parse { .. } => EXIT_CONFIG,
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.into(),
        source,
    })
}

fn load_params(path: Option<&Path>) -> Result<ChannelParams, Error> {
    let params = match path {
        Some(p) => read_json(p)?,
        None => ChannelParams::default(),
    };
    params.validate()?;
    Ok(params)
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.into(),
        source,
    }
}

/// The channel of a stored scenario is drawn from the scenario's own seed.
fn channel_for(scenario: &Scenario, params: &ChannelParams) -> Result<PathLossMatrix, Error> {
    build_path_loss_matrix(scenario, params, &mut stream(scenario.seed, CHANNEL_STREAM))
}

fn profile_for(
    scenario: &Scenario,
    params: Option<&Path>,
    user_weight: f64,
) -> Result<(PathLossMatrix, PreferenceProfile), Error> {
    let params = load_params(params)?;
    let matrix = channel_for(scenario, &params)?;
    let profile = build_preferences(&matrix, &scenario.served_users(), user_weight)?;
    Ok((matrix, profile))
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            trials,
            seed,
            trace,
            timing,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(out) = out {
                cfg.experiment.output_path = out;
            }
            if let Some(t) = trials {
                cfg.experiment.trials_per_point = t;
            }
            if let Some(s) = seed {
                cfg.experiment.master_seed = s;
            }
            cfg.experiment.trace |= trace;
            cfg.experiment.record_runtime |= timing;
            let output = run_experiment(&cfg)?;
            for p in &output.summary.points {
                println!(
                    "{:>4} HAPs x {:>5} UAVs: gs {:.3}  random {:.3}  gap {:.3} ± {:.3}",
                    p.n_haps,
                    p.m_uavs,
                    p.gs_mean_score.mean,
                    p.random_mean_score.mean,
                    p.score_gap.mean,
                    p.score_gap.std_err
                );
            }
            println!(
                "wrote {} and {}",
                cfg.experiment.output_path.join("results.csv").display(),
                cfg.experiment.output_path.join(SUMMARY_FILE).display()
            );
            Ok(0)
        }
        Command::GenScenario { config, out, seed } => {
            let mut cfg: ScenarioConfig = read_json(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            generate_scenario(&cfg)?.save(&out)?;
            Ok(0)
        }
        Command::Pathloss { scenario, params, out } => {
            let scenario = Scenario::load(&scenario)?;
            let params = load_params(params.as_deref())?;
            let matrix = channel_for(&scenario, &params)?;
            let file = File::create(&out).map_err(io_err(&out))?;
            matrix.write_csv(BufWriter::new(file)).map_err(io_err(&out))?;
            Ok(0)
        }
        Command::Solve {
            scenario,
            params,
            user_weight,
            algorithm,
            out,
            trace,
        } => {
            let scenario = Scenario::load(&scenario)?;
            let (matrix, profile) = profile_for(&scenario, params.as_deref(), user_weight)?;
            let capacities = scenario.capacities();
            let matching = match algorithm {
                Algorithm::GaleShapley => {
                    let stdout = io::stdout();
                    let mut lock = stdout.lock();
                    gale_shapley_traced(&profile, &capacities, |ev| {
                        if trace {
                            let _ = writeln!(lock, "{ev}");
                        }
                    })?
                    .0
                }
                Algorithm::Random => random_matching(
                    &mut stream(scenario.seed, BASELINE_STREAM),
                    &capacities,
                    scenario.m_uavs(),
                ),
            };
            let report = score_matching(&matching, &matrix, &scenario.served_users(), user_weight)?;
            matching.save(&out)?;
            eprintln!(
                "matched {} of {} UAVs, mean score {}",
                report.matched_count,
                scenario.m_uavs(),
                report.mean_score.map_or("n/a".to_string(), |s| format!("{s:.6}"))
            );
            Ok(0)
        }
        Command::Verify {
            scenario,
            matching,
            params,
            user_weight,
        } => {
            let scenario = Scenario::load(&scenario)?;
            let matching = Matching::load_file(&matching)?;
            if matching.n_haps() != scenario.n_haps() || matching.m_uavs() != scenario.m_uavs() {
                return Err(Error::Invalid(format!(
                    "matching is {}x{} but scenario is {}x{}",
                    matching.n_haps(),
                    matching.m_uavs(),
                    scenario.n_haps(),
                    scenario.m_uavs()
                )));
            }
            let capacities = scenario.capacities();
            matching.validate(&capacities)?;
            let (_, profile) = profile_for(&scenario, params.as_deref(), user_weight)?;
            let blocking = find_blocking_pairs(&matching, &profile, &capacities);
            if blocking.is_empty() {
                println!("stable: {} pairs, no blocking pairs", matching.len());
                Ok(0)
            } else {
                println!("unstable: {} blocking pair(s)", blocking.len());
                for bp in &blocking {
                    println!("{bp}");
                }
                Ok(EXIT_UNSTABLE)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
