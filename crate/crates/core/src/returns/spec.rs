use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient of the per-decision control variate; `-1` gives CV Sarsa.
pub const DEFAULT_CV_COEFFICIENT: f64 = -1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorVariant {
    /// Per-decision importance-sampled n-step Sarsa.
    SarsaIs,
    /// n-step Expected Sarsa: importance-sampled rewards, bootstrapping off
    /// the target-policy expectation.
    ExpectedSarsa,
    /// n-step Sarsa with the action-value control variate at every step.
    CvSarsa,
    TreeBackup,
    /// State-value return with the per-decision control variate.
    StateCv,
}

impl EstimatorVariant {
    pub const ALL: [Self; 5] = [
        Self::SarsaIs,
        Self::ExpectedSarsa,
        Self::CvSarsa,
        Self::TreeBackup,
        Self::StateCv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SarsaIs => "sarsa_is",
            Self::ExpectedSarsa => "expected_sarsa",
            Self::CvSarsa => "cv_sarsa",
            Self::TreeBackup => "tree_backup",
            Self::StateCv => "state_cv",
        }
    }

    /// Whether the estimator bootstraps off state values rather than action values.
    pub fn uses_state_values(self) -> bool {
        matches!(self, Self::StateCv)
    }
}

impl fmt::Display for EstimatorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown estimator variant `{s}`")))
    }
}

/// An n-step return estimator: variant, horizon, discount and control-variate
/// coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnEstimatorSpec {
    pub variant: EstimatorVariant,
    pub n: usize,
    pub gamma: f64,
    /// Only read by [`EstimatorVariant::CvSarsa`]. `0` reduces it to
    /// importance-sampled Sarsa.
    pub c: f64,
}

impl ReturnEstimatorSpec {
    pub fn new(variant: EstimatorVariant, n: usize, gamma: f64) -> Result<Self> {
        Self {
            variant,
            n,
            gamma,
            c: DEFAULT_CV_COEFFICIENT,
        }
        .validated()
    }

    pub fn with_c(self, c: f64) -> Result<Self> {
        Self { c, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!(
                "gamma {} outside [0, 1]",
                self.gamma
            )));
        }
        if !self.c.is_finite() {
            return Err(Error::Config(
                "control-variate coefficient must be finite".into(),
            ));
        }
        Ok(self)
    }
}
