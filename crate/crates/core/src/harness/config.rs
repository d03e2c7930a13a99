use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{GRID_STEP_CAP, MOUNTAIN_CAR_STEP_CAP};
use crate::error::{Error, Result};
use crate::learner::DEFAULT_DIVERGENCE_THRESHOLD;
use crate::returns::{EstimatorVariant, ReturnEstimatorSpec, DEFAULT_CV_COEFFICIENT};

pub const DEFAULT_ALPHA_GRID: [f64; 11] = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Grid world, uniform behaviour, target moves north with probability 1 − ε (ε = 0.5).
    GridworldOffpolicy,
    /// Grid world, uniform behaviour and target.
    GridworldOnpolicy,
    /// Mountain car, tile coding, on-policy ε-greedy control (ε = 0.1).
    MountainCar,
}

impl ExperimentKind {
    pub fn default_measurement(self) -> Measurement {
        match self {
            Self::MountainCar => Measurement::ReturnPerEpisode,
            _ => Measurement::RmsAfterFinalEpisode,
        }
    }

    pub fn default_episodes(self) -> usize {
        match self {
            Self::MountainCar => 100,
            _ => 200,
        }
    }

    pub fn default_runs(self) -> usize {
        match self {
            Self::MountainCar => 100,
            _ => 1000,
        }
    }

    pub fn step_cap(self) -> usize {
        match self {
            Self::MountainCar => MOUNTAIN_CAR_STEP_CAP,
            _ => GRID_STEP_CAP,
        }
    }

    /// RMS runs clamp to the divergence threshold; return runs record the
    /// worst possible return.
    pub fn default_sentinel(self) -> f64 {
        match self {
            Self::MountainCar => -(MOUNTAIN_CAR_STEP_CAP as f64),
            _ => DEFAULT_DIVERGENCE_THRESHOLD,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    RmsAfterFinalEpisode,
    ReturnPerEpisode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub variant: EstimatorVariant,
    pub n: usize,
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_c() -> f64 {
    DEFAULT_CV_COEFFICIENT
}

impl AlgorithmSpec {
    pub fn new(variant: EstimatorVariant, n: usize) -> Self {
        Self {
            variant,
            n,
            c: DEFAULT_CV_COEFFICIENT,
        }
    }

    /// Variant name, with the coefficient appended when it is not the default.
    pub fn label(&self) -> String {
        if self.variant == EstimatorVariant::CvSarsa && self.c != DEFAULT_CV_COEFFICIENT {
            format!("{}(c={})", self.variant, self.c)
        } else {
            self.variant.to_string()
        }
    }

    pub fn estimator(&self) -> Result<ReturnEstimatorSpec> {
        ReturnEstimatorSpec::new(self.variant, self.n, 1.0)?.with_c(self.c)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: ExperimentKind,
    algorithms: Vec<AlgorithmSpec>,
    alpha_grid: Vec<f64>,
    episodes: Option<usize>,
    runs: Option<usize>,
    base_seed: Option<u64>,
    measurement: Option<Measurement>,
    divergence_sentinel: Option<f64>,
}

/// A fully resolved sweep description.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub algorithms: Vec<AlgorithmSpec>,
    pub alpha_grid: Vec<f64>,
    pub episodes: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub measurement: Measurement,
    pub divergence_sentinel: f64,
}

impl ExperimentConfig {
    /// Defaults for `experiment` with the given algorithms and the default α grid.
    pub fn new(experiment: ExperimentKind, algorithms: Vec<AlgorithmSpec>) -> Self {
        Self {
            experiment,
            algorithms,
            alpha_grid: DEFAULT_ALPHA_GRID.to_vec(),
            episodes: experiment.default_episodes(),
            runs: experiment.default_runs(),
            base_seed: 0,
            measurement: experiment.default_measurement(),
            divergence_sentinel: experiment.default_sentinel(),
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        let raw: ConfigFile = serde_json::from_str(text)?;
        Ok(Self {
            experiment: raw.experiment,
            algorithms: raw.algorithms,
            alpha_grid: raw.alpha_grid,
            episodes: raw.episodes.unwrap_or(raw.experiment.default_episodes()),
            runs: raw.runs.unwrap_or(raw.experiment.default_runs()),
            base_seed: raw.base_seed.unwrap_or(0),
            measurement: raw
                .measurement
                .unwrap_or(raw.experiment.default_measurement()),
            divergence_sentinel: raw
                .divergence_sentinel
                .unwrap_or(raw.experiment.default_sentinel()),
        })
    }

    /// Reads and validates a JSON config.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let config = Self::from_json(&text).map_err(|source| Error::ConfigParse {
            path: path.display().to_string(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::Config(format!("`{key}`: {msg}")));
        if self.algorithms.is_empty() {
            return bad("algorithms", "must not be empty".into());
        }
        for a in &self.algorithms {
            if a.variant == EstimatorVariant::StateCv {
                return bad(
                    "algorithms",
                    "state_cv cannot drive an action-value learner".into(),
                );
            }
            a.estimator()
                .map_err(|e| Error::Config(format!("`algorithms`: {}: {e}", a.label())))?;
        }
        if self.alpha_grid.is_empty() {
            return bad("alpha_grid", "must not be empty".into());
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return bad("alpha_grid", format!("step size {a} outside (0, 1]"));
        }
        if self.episodes == 0 {
            return bad("episodes", "must be at least 1".into());
        }
        if self.runs == 0 {
            return bad("runs", "must be at least 1".into());
        }
        let expected = self.experiment.default_measurement();
        if self.measurement != expected {
            return bad(
                "measurement",
                format!("{:?} experiments measure {expected:?}", self.experiment),
            );
        }
        if !self.divergence_sentinel.is_finite() {
            return bad("divergence_sentinel", "must be finite".into());
        }
        Ok(())
    }
}
