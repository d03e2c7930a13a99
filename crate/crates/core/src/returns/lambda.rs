//! λ-returns on frozen episodes.
//!
//! Two independent routes: the geometrically weighted mixture of n-step
//! returns, and the equivalent sum of one-step TD errors with a per-step
//! decay. They agree whenever the value function is held fixed, which is
//! what the tests check.

use super::{estimate, EstimatorVariant, FrozenEpisode, ReturnEstimatorSpec};
use crate::error::{Error, Result};

/// TD-error sum forms, each paired with the n-step estimator it matches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaForm {
    /// One-step Sarsa errors, decay `γλρ`.
    Sarsa,
    /// One-step Expected Sarsa errors, decay `γλρ`.
    CvSarsa,
    /// One-step Expected Sarsa errors, decay `γλπ`.
    TreeBackup,
    /// State TD errors scaled by a leading `ρ_t`, decay `γλρ`.
    StateValue,
}

impl LambdaForm {
    pub const ALL: [Self; 4] = [
        Self::Sarsa,
        Self::CvSarsa,
        Self::TreeBackup,
        Self::StateValue,
    ];

    pub fn matching_variant(self) -> EstimatorVariant {
        match self {
            Self::Sarsa => EstimatorVariant::SarsaIs,
            Self::CvSarsa => EstimatorVariant::CvSarsa,
            Self::TreeBackup => EstimatorVariant::TreeBackup,
            Self::StateValue => EstimatorVariant::StateCv,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::Usage(format!("λ = {lambda} outside [0, 1]")))
    }
}

/// `(1−λ) Σ_{n=1}^{T−t−1} λ^{n−1} Ĝ_{t:t+n} + λ^{T−t−1} Ĝ_{t:T}`, with `Ĝ` from
/// `spec.variant` (its `n` is ignored).
pub fn lambda_return_weighted(
    episode: &FrozenEpisode,
    t: usize,
    spec: &ReturnEstimatorSpec,
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    if t >= episode.len() {
        return Err(Error::Usage(format!(
            "t = {t} past episode end {}",
            episode.len()
        )));
    }
    let remaining = episode.len() - t;
    let mut total = 0.0;
    let mut weight = 1.0;
    for n in 1..remaining {
        let g = estimate(spec, &episode.window(t, n)?);
        total += (1.0 - lambda) * weight * g;
        weight *= lambda;
    }
    total += weight * estimate(spec, &episode.window(t, remaining)?);
    Ok(total)
}

/// The λ-return written as a decayed sum of one-step TD errors from time `t`.
pub fn lambda_return_tderror_sum(
    episode: &FrozenEpisode,
    t: usize,
    form: LambdaForm,
    gamma: f64,
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    let d = episode.decisions();
    let r = episode.rewards();
    let end = episode.len();
    if t >= end {
        return Err(Error::Usage(format!("t = {t} past episode end {end}")));
    }
    let mut sum = 0.0;
    let mut decay = 1.0;
    for k in t..end {
        if k > t {
            let factor = match form {
                LambdaForm::TreeBackup => d[k].target_prob,
                _ => d[k].rho,
            };
            decay *= gamma * lambda * factor;
        }
        let next = d.get(k + 1);
        let delta = match form {
            LambdaForm::Sarsa => {
                r[k] + gamma * next.map_or(0.0, |n| n.rho * n.q_taken) - d[k].q_taken
            }
            LambdaForm::CvSarsa | LambdaForm::TreeBackup => {
                r[k] + gamma * next.map_or(0.0, |n| n.q_expected) - d[k].q_taken
            }
            LambdaForm::StateValue => {
                r[k] + gamma * next.map_or(0.0, |n| n.state_value) - d[k].state_value
            }
        };
        sum += decay * delta;
    }
    Ok(match form {
        LambdaForm::StateValue => d[t].state_value + d[t].rho * sum,
        _ => d[t].q_taken + sum,
    })
}
