//! Online n-step TD learning.
//!
//! One loop serves both settings. In prediction the behaviour and target
//! policies are fixed tables; in control both are ε-greedy with respect to the
//! current action values (so every importance ratio is 1). The update for
//! `(S_τ, A_τ)` happens as soon as step `τ + n` (or the end of the episode) has
//! been observed, using the value function as it is at that moment.

use std::borrow::Cow;

use crate::approx::{dot, ActionValueFunction};
use crate::error::{Error, Result};
use crate::mdp::{sample_from_row, ActionId, DiscretePolicy, Episodic, StateId};
use crate::returns::{estimate, Decision, EstimatorVariant, ReturnContext, ReturnEstimatorSpec};
use crate::rng::{seeded, RunRng};

pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e6;

/// ε-greedy probabilities: the greedy action gets `1 − ε + ε/|A|`, every other
/// action `ε/|A|`. Ties go to the lowest index.
pub fn epsilon_greedy_row(q_values: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if q_values.is_empty() {
        return Err(Error::Usage("ε-greedy over an empty action set".into()));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Usage(format!("ε = {epsilon} outside [0, 1]")));
    }
    let n = q_values.len();
    let greedy = greedy_action(q_values);
    let explore = epsilon / n as f64;
    let mut row = vec![explore; n];
    row[greedy.0] = 1.0 - epsilon + explore;
    Ok(row)
}

/// First index attaining the maximum.
pub fn greedy_action(q_values: &[f64]) -> ActionId {
    let mut best = 0;
    for (a, &q) in q_values.iter().enumerate().skip(1) {
        if q > q_values[best] {
            best = a;
        }
    }
    ActionId(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LearnerMode {
    Prediction,
    Control,
}

#[derive(Clone, Debug)]
pub enum PolicySpec {
    /// Fixed tabular behaviour and target policies.
    Fixed {
        behaviour: DiscretePolicy,
        target: DiscretePolicy,
    },
    /// Behaviour and target both ε-greedy in the current action values.
    EpsilonGreedy { epsilon: f64 },
}

#[derive(Clone, Debug)]
pub struct LearnerConfig {
    pub estimator: ReturnEstimatorSpec,
    pub step_size: f64,
    pub policies: PolicySpec,
    pub max_steps: usize,
    /// A run diverges once an updated value exceeds this in magnitude.
    pub divergence_threshold: f64,
}

impl LearnerConfig {
    pub fn mode(&self) -> LearnerMode {
        match self.policies {
            PolicySpec::Fixed { .. } => LearnerMode::Prediction,
            PolicySpec::EpsilonGreedy { .. } => LearnerMode::Control,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.estimator.validated()?;
        if !(self.step_size > 0.0 && self.step_size <= 1.0) {
            return Err(Error::Config(format!(
                "step size {} outside (0, 1]",
                self.step_size
            )));
        }
        if self.estimator.variant == EstimatorVariant::StateCv {
            return Err(Error::Config(
                "state_cv targets state values and cannot drive an action-value learner".into(),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("episode cap must be at least 1".into()));
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::Config(
                "divergence threshold must be positive".into(),
            ));
        }
        match &self.policies {
            PolicySpec::Fixed { behaviour, target } => behaviour.covers(target),
            PolicySpec::EpsilonGreedy { epsilon } if !(0.0..=1.0).contains(epsilon) => {
                Err(Error::Config(format!("ε = {epsilon} outside [0, 1]")))
            }
            PolicySpec::EpsilonGreedy { .. } => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeMetrics {
    /// Undiscounted sum of rewards.
    pub episode_return: f64,
    pub length: usize,
    pub truncated: bool,
    pub updates: usize,
    pub diverged: bool,
}

/// Everything one learning run owns.
#[derive(Clone, Debug)]
pub struct RunState<Q> {
    pub q: Q,
    pub episodes: usize,
    pub history: Vec<EpisodeMetrics>,
    pub diverged: bool,
    pub rng: RunRng,
}

impl<Q> RunState<Q> {
    pub fn new(q: Q, seed: u64) -> Self {
        Self {
            q,
            episodes: 0,
            history: Vec::new(),
            diverged: false,
            rng: seeded(seed),
        }
    }
}

trait Rows<S, Q> {
    fn behaviour<'a>(&'a self, state: &S, q: &Q) -> Result<Cow<'a, [f64]>>;
    fn target<'a>(&'a self, state: &S, q: &Q) -> Result<Cow<'a, [f64]>>;
    fn rho(&self, state: &S, action: ActionId) -> Result<f64>;
}

struct FixedRows<'p> {
    behaviour: &'p DiscretePolicy,
    target: &'p DiscretePolicy,
}

impl<Q> Rows<StateId, Q> for FixedRows<'_> {
    fn behaviour<'a>(&'a self, state: &StateId, _q: &Q) -> Result<Cow<'a, [f64]>> {
        Ok(Cow::Borrowed(self.behaviour.row(*state)))
    }

    fn target<'a>(&'a self, state: &StateId, _q: &Q) -> Result<Cow<'a, [f64]>> {
        Ok(Cow::Borrowed(self.target.row(*state)))
    }

    fn rho(&self, state: &StateId, action: ActionId) -> Result<f64> {
        self.behaviour.ratio_for(self.target, *state, action)
    }
}

struct GreedyRows {
    epsilon: f64,
}

impl<S, Q: ActionValueFunction<S>> Rows<S, Q> for GreedyRows {
    fn behaviour<'a>(&'a self, state: &S, q: &Q) -> Result<Cow<'a, [f64]>> {
        epsilon_greedy_row(&q.action_values(state), self.epsilon).map(Cow::Owned)
    }

    fn target<'a>(&'a self, state: &S, q: &Q) -> Result<Cow<'a, [f64]>> {
        self.behaviour(state, q)
    }

    fn rho(&self, _state: &S, _action: ActionId) -> Result<f64> {
        Ok(1.0)
    }
}

/// Runs one prediction episode with fixed behaviour and target policies.
pub fn run_prediction_episode<E, Q>(
    state: &mut RunState<Q>,
    env: &E,
    config: &LearnerConfig,
) -> Result<EpisodeMetrics>
where
    E: Episodic<State = StateId>,
    Q: ActionValueFunction<StateId>,
{
    config.validate()?;
    let PolicySpec::Fixed { behaviour, target } = &config.policies else {
        return Err(Error::Config(
            "prediction needs fixed behaviour and target policies".into(),
        ));
    };
    run_episode(state, env, config, &FixedRows { behaviour, target })
}

/// Runs one on-policy ε-greedy control episode.
pub fn run_control_episode<E, Q>(
    state: &mut RunState<Q>,
    env: &E,
    config: &LearnerConfig,
) -> Result<EpisodeMetrics>
where
    E: Episodic,
    Q: ActionValueFunction<E::State>,
{
    config.validate()?;
    let PolicySpec::EpsilonGreedy { epsilon } = config.policies else {
        return Err(Error::Config(
            "control needs an ε-greedy policy spec".into(),
        ));
    };
    run_episode(state, env, config, &GreedyRows { epsilon })
}

struct Experience<S> {
    states: Vec<S>,
    actions: Vec<ActionId>,
    rhos: Vec<f64>,
    rewards: Vec<f64>,
}

fn run_episode<E, Q, P>(
    run: &mut RunState<Q>,
    env: &E,
    config: &LearnerConfig,
    rows: &P,
) -> Result<EpisodeMetrics>
where
    E: Episodic,
    Q: ActionValueFunction<E::State>,
    P: Rows<E::State, Q>,
{
    let mut metrics = EpisodeMetrics {
        episode_return: 0.0,
        length: 0,
        truncated: false,
        updates: 0,
        diverged: run.diverged,
    };
    if run.diverged {
        return Ok(metrics);
    }
    let n = config.estimator.n;
    let mut exp = Experience {
        states: Vec::new(),
        actions: Vec::new(),
        rhos: Vec::new(),
        rewards: Vec::new(),
    };
    let mut decisions = Vec::with_capacity(n + 1);

    let s0 = env.start(&mut run.rng);
    let a0 = sample_from_row(&rows.behaviour(&s0, &run.q)?, &mut run.rng);
    exp.rhos.push(rows.rho(&s0, a0)?);
    exp.states.push(s0);
    exp.actions.push(a0);

    let mut t = 0;
    let (end, terminal) = loop {
        let step = env.step(&exp.states[t], exp.actions[t], &mut run.rng)?;
        exp.rewards.push(step.reward);
        metrics.episode_return += step.reward;
        if step.terminal {
            break (t + 1, true);
        }
        let next = step.next_state;
        let a = sample_from_row(&rows.behaviour(&next, &run.q)?, &mut run.rng);
        exp.rhos.push(rows.rho(&next, a)?);
        exp.states.push(next);
        exp.actions.push(a);
        if t + 1 >= config.max_steps {
            metrics.truncated = true;
            break (t + 1, false);
        }
        if t + 1 >= n {
            let tau = t + 1 - n;
            if !update(run, config, rows, &exp, tau, tau + n, false, &mut decisions)? {
                metrics.diverged = true;
                metrics.length = t + 1;
                return Ok(finish(run, metrics));
            }
            metrics.updates += 1;
        }
        t += 1;
    };
    metrics.length = end;
    for tau in metrics.updates..end {
        let window_end = (tau + n).min(end);
        let ends_in_termination = terminal && window_end == end;
        if !update(
            run,
            config,
            rows,
            &exp,
            tau,
            window_end,
            ends_in_termination,
            &mut decisions,
        )? {
            metrics.diverged = true;
            break;
        }
        metrics.updates += 1;
    }
    Ok(finish(run, metrics))
}

fn finish<Q>(run: &mut RunState<Q>, metrics: EpisodeMetrics) -> EpisodeMetrics {
    run.diverged |= metrics.diverged;
    run.episodes += 1;
    run.history.push(metrics);
    metrics
}

/// Updates `(S_τ, A_τ)` towards the return over decisions `τ..=window_end`
/// (`τ..window_end` when the window ends in termination). Returns `false` if
/// the run diverged.
#[allow(clippy::too_many_arguments)]
fn update<S, Q, P>(
    run: &mut RunState<Q>,
    config: &LearnerConfig,
    rows: &P,
    exp: &Experience<S>,
    tau: usize,
    window_end: usize,
    terminal: bool,
    decisions: &mut Vec<Decision>,
) -> Result<bool>
where
    Q: ActionValueFunction<S>,
    P: Rows<S, Q>,
{
    let last = if terminal { window_end - 1 } else { window_end };
    decisions.clear();
    for k in tau..=last {
        let s = &exp.states[k];
        let a = exp.actions[k];
        let row = rows.target(s, &run.q)?;
        let values = run.q.action_values(s);
        let expected = dot(&row, &values);
        decisions.push(Decision {
            rho: exp.rhos[k],
            target_prob: row[a.0],
            q_taken: values[a.0],
            q_expected: expected,
            state_value: expected,
        });
    }
    let ctx = ReturnContext::new(decisions, &exp.rewards[tau..window_end], terminal)?;
    let target = estimate(&config.estimator, &ctx);
    match run
        .q
        .apply_update(&exp.states[tau], exp.actions[tau], config.step_size, target)
    {
        Ok(v) if v.is_finite() && v.abs() <= config.divergence_threshold => Ok(true),
        Ok(_) | Err(Error::NonFinite(_)) => Ok(false),
        Err(e) => Err(e),
    }
}
