use super::{Decision, EstimatorVariant, ReturnContext, ReturnEstimatorSpec};
use crate::mdp::ActionId;

/// Evaluates the estimator described by `spec` on `ctx`.
pub fn estimate(spec: &ReturnEstimatorSpec, ctx: &ReturnContext<'_>) -> f64 {
    let gamma = spec.gamma;
    match spec.variant {
        EstimatorVariant::SarsaIs => nstep_sarsa_is_return(ctx, gamma),
        EstimatorVariant::ExpectedSarsa => nstep_expected_sarsa_return(ctx, gamma),
        EstimatorVariant::CvSarsa => nstep_cv_sarsa_return(ctx, gamma, spec.c),
        EstimatorVariant::TreeBackup => nstep_tree_backup_return(ctx, gamma),
        EstimatorVariant::StateCv => nstep_state_cv_return(ctx, gamma),
    }
}

/// Backward pass shared by the action-value recursions:
/// `g ← R_{k+1} + γ · continuation(g, decision_{k+1}, is_bootstrap)`, starting
/// from `base(bootstrap)`. A terminal successor contributes nothing.
fn backward(
    ctx: &ReturnContext<'_>,
    gamma: f64,
    base: impl Fn(&Decision) -> f64,
    continuation: impl Fn(f64, &Decision, bool) -> f64,
) -> f64 {
    let decisions = ctx.decisions();
    let rewards = ctx.rewards();
    let h = rewards.len();
    let mut g = ctx.bootstrap().map_or(0.0, &base);
    for k in (0..h).rev() {
        let tail = match decisions.get(k + 1) {
            Some(next) => continuation(g, next, k + 1 == h),
            None => 0.0,
        };
        g = rewards[k] + gamma * tail;
    }
    g
}

/// `Ĝ_{t:t+n} = R_{t+1} + γ ρ_{t+1} Ĝ_{t+1:t+n}`, `Ĝ_{t+n:t+n} = Q(S_{t+n}, A_{t+n})`.
pub fn nstep_sarsa_is_return(ctx: &ReturnContext<'_>, gamma: f64) -> f64 {
    backward(ctx, gamma, |d| d.q_taken, |g, next, _| next.rho * g)
}

/// n-step Expected Sarsa. Intermediate rewards are importance-sampled per
/// decision and the final step bootstraps off `E_π[Q(S_{t+n}, ·)]`. On-policy
/// this is the plain discounted reward sum plus `γ^n E_π[Q(S_{t+n}, ·)]`.
pub fn nstep_expected_sarsa_return(ctx: &ReturnContext<'_>, gamma: f64) -> f64 {
    backward(
        ctx,
        gamma,
        |d| d.q_expected,
        |g, next, bootstrap| if bootstrap { g } else { next.rho * g },
    )
}

/// n-step Sarsa with a per-decision control variate:
///
/// `Ĝ_{t:t+n} = R_{t+1} + γ (ρ_{t+1} Ĝ_{t+1:t+n} + c (ρ_{t+1} Q(S_{t+1}, A_{t+1}) − E_π[Q(S_{t+1}, ·)]))`
///
/// with `Ĝ_{t+n:t+n} = Q(S_{t+n}, A_{t+n})`. `c = -1` is CV Sarsa, `c = 0`
/// is importance-sampled Sarsa. Evaluated as `ρ (Ĝ + c Q) − c E_π[Q]`, so at
/// the bootstrap step with `c = -1` the sampled value cancels exactly and the
/// one-step return is bit-for-bit the Expected Sarsa target.
pub fn nstep_cv_sarsa_return(ctx: &ReturnContext<'_>, gamma: f64, c: f64) -> f64 {
    backward(
        ctx,
        gamma,
        |d| d.q_taken,
        |g, next, _| next.rho * (g + c * next.q_taken) - c * next.q_expected,
    )
}

/// n-step Tree-backup in expectation-correction form:
/// `R_{t+1} + γ (π_{t+1} Ĝ_{t+1:t+n} + E_π[Q(S_{t+1}, ·)] − π_{t+1} Q(S_{t+1}, A_{t+1}))`.
pub fn nstep_tree_backup_return(ctx: &ReturnContext<'_>, gamma: f64) -> f64 {
    backward(
        ctx,
        gamma,
        |d| d.q_taken,
        |g, next, _| next.target_prob * g + next.q_expected - next.target_prob * next.q_taken,
    )
}

/// State-value return with the per-decision control variate:
/// `Ĝ_{t:t+n} = ρ_t (R_{t+1} + γ Ĝ_{t+1:t+n}) + (1 − ρ_t) V(S_t)`, `Ĝ_{t+n:t+n} = V(S_{t+n})`.
pub fn nstep_state_cv_return(ctx: &ReturnContext<'_>, gamma: f64) -> f64 {
    let decisions = ctx.decisions();
    let rewards = ctx.rewards();
    let mut g = ctx.bootstrap().map_or(0.0, |d| d.state_value);
    for k in (0..rewards.len()).rev() {
        let d = &decisions[k];
        g = d.rho * (rewards[k] + gamma * g) + (1.0 - d.rho) * d.state_value;
    }
    g
}

/// Full action information at a decision point, for the explicit-sum form of
/// Tree-backup.
#[derive(Clone, Copy, Debug)]
pub struct ActionDetail<'a> {
    pub policy_row: &'a [f64],
    pub q_values: &'a [f64],
    pub action: ActionId,
}

impl ActionDetail<'_> {
    /// The [`Decision`] this detail induces, with importance ratio `rho`.
    pub fn decision(&self, rho: f64) -> Decision {
        let expected = crate::approx::dot(self.policy_row, self.q_values);
        Decision {
            rho,
            target_prob: self.policy_row[self.action.0],
            q_taken: self.q_values[self.action.0],
            q_expected: expected,
            state_value: expected,
        }
    }
}

/// Tree-backup with the untaken actions summed explicitly:
/// `R_{t+1} + γ (π_{t+1} Ĝ_{t+1:t+n} + Σ_{a ≠ A_{t+1}} π(S_{t+1}, a) Q(S_{t+1}, a))`.
///
/// `details` follows the [`ReturnContext`] layout.
pub fn nstep_tree_backup_return_explicit(
    details: &[ActionDetail<'_>],
    rewards: &[f64],
    terminal: bool,
    gamma: f64,
) -> f64 {
    let h = rewards.len();
    assert_eq!(details.len(), h + usize::from(!terminal), "window shape");
    let mut g = if terminal {
        0.0
    } else {
        let d = &details[h];
        d.q_values[d.action.0]
    };
    for k in (0..h).rev() {
        let tail = details.get(k + 1).map_or(0.0, |next| {
            let untaken: f64 = (0..next.q_values.len())
                .filter(|&a| a != next.action.0)
                .map(|a| next.policy_row[a] * next.q_values[a])
                .sum();
            next.policy_row[next.action.0] * g + untaken
        });
        g = rewards[k] + gamma * tail;
    }
    g
}
