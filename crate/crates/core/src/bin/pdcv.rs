use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pdcv::approx::write_snapshot;
use pdcv::env::GridWorld;
use pdcv::harness::{
    aggregate, aggregate_series, emit_csv, emit_series_csv, gridworld_policies, run_cell,
    run_sweep, write_csv, AlgorithmSpec, Cell, ExperimentConfig, ExperimentKind, Measurement,
    Setup, Summary,
};
use pdcv::oracle::{exact_q, DEFAULT_TOLERANCE};
use pdcv::returns::EstimatorVariant;
use pdcv::{Error, Result};

#[derive(Parser)]
#[command(
    name = "pdcv",
    version,
    about = "Multi-step TD experiments with per-decision control variates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact action values of a grid-world target policy, as CSV (state, action, q).
    Truth {
        /// Take the target policy from this config's experiment.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Target policy when no config is given: gridworld_onpolicy or gridworld_offpolicy.
        #[arg(long, default_value = "gridworld_offpolicy")]
        experiment: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One (algorithm, n, α) cell, printing every run.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Estimator variant, e.g. cv_sarsa.
        #[arg(long)]
        algorithm: EstimatorVariant,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        /// Control-variate coefficient for cv_sarsa.
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        c: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// The full (algorithm × α × run) grid of a config, aggregated to CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Aggregate CSV. Mountain-car sweeps also write `<stem>_series.csv` beside it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[arg(long)]
        runs: Option<usize>,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn load(path: &Path, seed: Option<u64>, runs: Option<usize>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        config.base_seed = seed;
    }
    if let Some(runs) = runs {
        config.runs = runs;
    }
    config.validate()?;
    Ok(config)
}

fn summary_for(config: &ExperimentConfig) -> Summary {
    match config.measurement {
        Measurement::RmsAfterFinalEpisode => Summary::Final,
        Measurement::ReturnPerEpisode => Summary::MeanOverEpisodes,
    }
}

fn series_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or("sweep".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_series.csv"))
}

fn truth(config: Option<PathBuf>, experiment: &str, out: Option<PathBuf>) -> Result<()> {
    let kind = match config {
        Some(path) => ExperimentConfig::load(path)?.experiment,
        None => serde_json::from_value(serde_json::Value::String(experiment.into()))
            .map_err(|_| Error::Usage(format!("unknown experiment `{experiment}`")))?,
    };
    if kind == ExperimentKind::MountainCar {
        return Err(Error::Usage(
            "truth tables exist only for the grid world".into(),
        ));
    }
    let (_, target) = gridworld_policies(kind)?;
    let table = exact_q(&GridWorld::new().model(), &target, DEFAULT_TOLERANCE)?;
    log::info!(
        "converged after {} sweeps, residual {:e}",
        table.sweeps,
        table.residual
    );
    let rows = table
        .pairs()
        .iter()
        .map(|&(s, a)| (s.0, a, table.get(s, a)));
    match out {
        Some(path) => write_snapshot(File::create(path)?, "state", "q", rows),
        None => write_snapshot(io::stdout().lock(), "state", "q", rows),
    }
}

fn run(config: ExperimentConfig, algorithm: AlgorithmSpec, alpha: f64) -> Result<()> {
    let mut config = config;
    config.algorithms = vec![algorithm];
    config.alpha_grid = vec![alpha];
    config.validate()?;
    let setup = Setup::new(config.experiment)?;
    let cell = Cell {
        index: 0,
        algorithm,
        alpha,
    };
    let mut stdout = io::stdout().lock();
    let mut records = Vec::with_capacity(config.runs);
    for r in 0..config.runs {
        let record = run_cell(&setup, &config, &cell, r)?;
        let last = record.values.last().copied().unwrap_or(f64::NAN);
        let mean = record.values.iter().sum::<f64>() / record.values.len() as f64;
        writeln!(
            stdout,
            "run {r:4}  seed {:#018x}  final {last:.6}  mean {mean:.6}{}",
            record.seed,
            if record.diverged { "  diverged" } else { "" }
        )?;
        records.push(record);
    }
    let rows = aggregate(&records, summary_for(&config));
    write_csv(&mut stdout, &rows)
}

fn sweep(config: ExperimentConfig, out: &Path, workers: usize) -> Result<()> {
    let records = run_sweep(&config, workers)?;
    let rows = aggregate(&records, summary_for(&config));
    emit_csv(&rows, out)?;
    if config.measurement == Measurement::ReturnPerEpisode {
        let path = series_path(out);
        emit_series_csv(&aggregate_series(&records), &path)?;
        log::info!("wrote {}", path.display());
    }
    log::info!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Truth {
            config,
            experiment,
            out,
        } => truth(config, &experiment, out),
        Command::Run {
            config,
            algorithm,
            n,
            alpha,
            c,
            seed,
            runs,
        } => load(&config, seed, runs).and_then(|cfg| {
            run(
                cfg,
                AlgorithmSpec {
                    variant: algorithm,
                    n,
                    c,
                },
                alpha,
            )
        }),
        Command::Sweep {
            config,
            out,
            seed,
            workers,
            runs,
        } => load(&config, seed, runs).and_then(|cfg| sweep(cfg, &out, workers)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
