use rayon::prelude::*;

use super::{AlgorithmSpec, ExperimentConfig, ExperimentKind};
use crate::approx::{LinearQ, TabularQ, TileCoder, TileCoderConfig};
use crate::env::{GridWorld, MountainCar};
use crate::error::{Error, Result};
use crate::learner::{
    epsilon_greedy_row, run_control_episode, run_prediction_episode, LearnerConfig, PolicySpec,
    RunState, DEFAULT_DIVERGENCE_THRESHOLD,
};
use crate::mdp::DiscretePolicy;
use crate::oracle::{exact_q, rms_error, ExactQTable, DEFAULT_TOLERANCE};
use crate::rng::derive_seed;

const OFFPOLICY_EPSILON: f64 = 0.5;
const CONTROL_EPSILON: f64 = 0.1;

/// One `(algorithm, α)` point of the sweep grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    /// Position in the grid, algorithm-major. Orders output only.
    pub index: usize,
    pub algorithm: AlgorithmSpec,
    pub alpha: f64,
}

impl Cell {
    /// Stable 64-bit identity (FNV-1a over the label, n, c and α bits). Seeds
    /// derive from this rather than from `index`, so growing the grid leaves
    /// existing runs' streams untouched.
    pub fn key(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.algorithm.variant.name().as_bytes());
        eat(&(self.algorithm.n as u64).to_le_bytes());
        eat(&self.algorithm.c.to_bits().to_le_bytes());
        eat(&self.alpha.to_bits().to_le_bytes());
        h
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub algorithm: String,
    pub n: usize,
    pub alpha: f64,
    pub cell: usize,
    pub run: usize,
    pub seed: u64,
    /// `[final RMS]` for grid-world prediction, one return per episode for
    /// mountain car. Diverged runs hold the sentinel.
    pub values: Vec<f64>,
    pub diverged: bool,
}

/// Read-only material shared by every run of an experiment.
#[derive(Clone, Debug)]
pub struct Setup {
    pub experiment: ExperimentKind,
    pub behaviour: Option<DiscretePolicy>,
    pub target: Option<DiscretePolicy>,
    pub truth: Option<ExactQTable>,
    pub coder: Option<TileCoder>,
}

/// Behaviour and target policies of the grid-world experiments.
pub fn gridworld_policies(kind: ExperimentKind) -> Result<(DiscretePolicy, DiscretePolicy)> {
    let states = GridWorld::new().state_count();
    let uniform = DiscretePolicy::uniform(states, 4);
    match kind {
        ExperimentKind::GridworldOnpolicy => Ok((uniform.clone(), uniform)),
        ExperimentKind::GridworldOffpolicy => {
            let north = epsilon_greedy_row(&[1.0, 0.0, 0.0, 0.0], OFFPOLICY_EPSILON)?;
            Ok((uniform, DiscretePolicy::repeated(states, north)?))
        }
        ExperimentKind::MountainCar => {
            Err(Error::Usage("mountain car has no tabular policies".into()))
        }
    }
}

impl Setup {
    pub fn new(experiment: ExperimentKind) -> Result<Self> {
        match experiment {
            ExperimentKind::MountainCar => Ok(Self {
                experiment,
                behaviour: None,
                target: None,
                truth: None,
                coder: Some(TileCoder::new(TileCoderConfig::mountain_car())?),
            }),
            _ => {
                let (behaviour, target) = gridworld_policies(experiment)?;
                let truth = exact_q(&GridWorld::new().model(), &target, DEFAULT_TOLERANCE)?;
                Ok(Self {
                    experiment,
                    behaviour: Some(behaviour),
                    target: Some(target),
                    truth: Some(truth),
                    coder: None,
                })
            }
        }
    }
}

pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    config
        .algorithms
        .iter()
        .flat_map(|&algorithm| {
            config
                .alpha_grid
                .iter()
                .map(move |&alpha| (algorithm, alpha))
        })
        .enumerate()
        .map(|(index, (algorithm, alpha))| Cell {
            index,
            algorithm,
            alpha,
        })
        .collect()
}

fn learner_config(setup: &Setup, config: &ExperimentConfig, cell: &Cell) -> Result<LearnerConfig> {
    let policies = match setup.experiment {
        ExperimentKind::MountainCar => PolicySpec::EpsilonGreedy {
            epsilon: CONTROL_EPSILON,
        },
        _ => PolicySpec::Fixed {
            behaviour: setup.behaviour.clone().expect("grid setup has policies"),
            target: setup.target.clone().expect("grid setup has policies"),
        },
    };
    let threshold = match setup.experiment {
        ExperimentKind::MountainCar => DEFAULT_DIVERGENCE_THRESHOLD,
        _ => config.divergence_sentinel,
    };
    let learner = LearnerConfig {
        estimator: cell.algorithm.estimator()?,
        step_size: cell.alpha,
        policies,
        max_steps: config.experiment.step_cap(),
        divergence_threshold: threshold,
    };
    learner.validate()?;
    Ok(learner)
}

/// Runs repetition `run` of `cell` from its derived seed.
pub fn run_cell(
    setup: &Setup,
    config: &ExperimentConfig,
    cell: &Cell,
    run: usize,
) -> Result<RunRecord> {
    let seed = derive_seed(config.base_seed, cell.key(), run as u64);
    let learner = learner_config(setup, config, cell)?;
    let (values, diverged) = match setup.experiment {
        ExperimentKind::MountainCar => {
            let coder = setup.coder.clone().expect("mountain car setup has a coder");
            let mut state = RunState::new(LinearQ::new(coder, 3, 0.0), seed);
            let env = MountainCar;
            let mut returns = Vec::with_capacity(config.episodes);
            for _ in 0..config.episodes {
                let m = run_control_episode(&mut state, &env, &learner)?;
                if m.diverged {
                    break;
                }
                returns.push(m.episode_return);
            }
            returns.resize(config.episodes, config.divergence_sentinel);
            (returns, state.diverged)
        }
        _ => {
            let truth = setup.truth.as_ref().expect("grid setup has a truth table");
            let env = GridWorld::new();
            let mut state = RunState::new(TabularQ::new(env.state_count(), 4, 0.0), seed);
            for _ in 0..config.episodes {
                run_prediction_episode(&mut state, &env, &learner)?;
                if state.diverged {
                    break;
                }
            }
            let rms = if state.diverged {
                config.divergence_sentinel
            } else {
                rms_error(&state.q, truth, config.divergence_sentinel).value
            };
            (
                vec![rms],
                state.diverged || rms >= config.divergence_sentinel,
            )
        }
    };
    Ok(RunRecord {
        algorithm: cell.algorithm.label(),
        n: cell.algorithm.n,
        alpha: cell.alpha,
        cell: cell.index,
        run,
        seed,
        values,
        diverged,
    })
}

/// Every `(cell, run)` of `config` on a pool of `workers` threads. The result
/// is ordered by cell then run and does not depend on `workers`.
pub fn run_sweep(config: &ExperimentConfig, workers: usize) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let setup = Setup::new(config.experiment)?;
    let jobs: Vec<(Cell, usize)> = cells(config)
        .into_iter()
        .flat_map(|cell| (0..config.runs).map(move |run| (cell, run)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let records: Result<Vec<RunRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|(cell, run)| run_cell(&setup, config, cell, *run))
            .collect()
    });
    log::debug!("{} runs finished", jobs.len());
    records
}
