//! Core MDP abstractions: identifiers, policies, importance ratios, sampled
//! trajectories and explicit tabular models.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance used when checking that probability rows are normalised.
pub const PROB_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Per-decision importance sampling ratio `π(s,a) / μ(s,a)`.
///
/// Fails with [`Error::InvalidSupport`] when the behaviour probability is zero,
/// since the behaviour policy could not have produced the action.
pub fn importance_ratio(pi_prob: f64, mu_prob: f64) -> Result<f64> {
    if !(mu_prob > 0.0) {
        return Err(Error::InvalidSupport {
            state: None,
            action: 0,
        });
    }
    Ok(pi_prob / mu_prob)
}

fn check_row(row: &[f64]) -> std::result::Result<(), String> {
    if row.is_empty() {
        return Err("empty probability row".into());
    }
    if let Some(p) = row.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(format!("probability {p} is negative or non-finite"));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(format!("row sums to {sum}, not 1"));
    }
    Ok(())
}

/// A stationary stochastic policy over a finite state set, one probability
/// row per state.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePolicy {
    rows: Vec<Vec<f64>>,
}

impl DiscretePolicy {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        for (s, row) in rows.iter().enumerate() {
            check_row(row).map_err(|e| Error::InvalidPolicy(format!("state {s}: {e}")))?;
        }
        Ok(Self { rows })
    }

    /// Equiprobable policy with `actions` actions in each of `states` states.
    pub fn uniform(states: usize, actions: usize) -> Self {
        let p = 1.0 / actions as f64;
        Self {
            rows: vec![vec![p; actions]; states],
        }
    }

    /// The same row in every state.
    pub fn repeated(states: usize, row: Vec<f64>) -> Result<Self> {
        Self::new(vec![row; states])
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, state: StateId) -> &[f64] {
        &self.rows[state.0]
    }

    pub fn prob(&self, state: StateId, action: ActionId) -> f64 {
        self.rows[state.0][action.0]
    }

    /// Checks that `self`, used as a behaviour policy, has support wherever
    /// `target` does.
    pub fn covers(&self, target: &DiscretePolicy) -> Result<()> {
        if self.rows.len() != target.rows.len() {
            return Err(Error::InvalidPolicy(format!(
                "behaviour covers {} states, target {}",
                self.rows.len(),
                target.rows.len()
            )));
        }
        for (s, (mu, pi)) in self.rows.iter().zip(&target.rows).enumerate() {
            if mu.len() != pi.len() {
                return Err(Error::InvalidPolicy(format!(
                    "state {s}: behaviour has {} actions, target {}",
                    mu.len(),
                    pi.len()
                )));
            }
            if let Some(a) = (0..mu.len()).find(|&a| pi[a] > 0.0 && mu[a] <= 0.0) {
                return Err(Error::InvalidSupport {
                    state: Some(s),
                    action: a,
                });
            }
        }
        Ok(())
    }

    /// Importance ratio of `target` with respect to `self` at `(state, action)`.
    pub fn ratio_for(
        &self,
        target: &DiscretePolicy,
        state: StateId,
        action: ActionId,
    ) -> Result<f64> {
        importance_ratio(target.prob(state, action), self.prob(state, action)).map_err(|_| {
            Error::InvalidSupport {
                state: Some(state.0),
                action: action.0,
            }
        })
    }
}

/// Draws an index from a normalised probability row using one uniform draw.
///
/// The draw is inverted through the cumulative sum; if rounding leaves the
/// draw above the final partial sum, the last action with nonzero probability
/// is returned.
pub fn sample_from_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> ActionId {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (a, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return ActionId(a);
        }
    }
    let last = row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1);
    ActionId(last)
}

pub fn sample_action<R: Rng + ?Sized>(
    policy: &DiscretePolicy,
    state: StateId,
    rng: &mut R,
) -> Result<ActionId> {
    if state.0 >= policy.state_count() {
        return Err(Error::Usage(format!(
            "state {state} outside policy with {} states",
            policy.state_count()
        )));
    }
    Ok(sample_from_row(policy.row(state), rng))
}

/// Result of one environment transition.
#[derive(Clone, Debug, PartialEq)]
pub struct Step<S> {
    pub reward: f64,
    pub next_state: S,
    pub terminal: bool,
}

/// An episodic environment driven one action at a time.
///
/// Implementations are value objects: `step` does not mutate the environment,
/// the caller threads the state through.
pub trait Episodic {
    type State: Clone + fmt::Debug;

    fn num_actions(&self, state: &Self::State) -> usize;

    fn start<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    fn step<R: Rng + ?Sized>(
        &self,
        state: &Self::State,
        action: ActionId,
        rng: &mut R,
    ) -> Result<Step<Self::State>>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition<S = StateId> {
    pub state: S,
    pub action: ActionId,
    pub reward: f64,
    pub next_state: S,
    /// Action sampled in `next_state`; absent when the episode terminated.
    pub next_action: Option<ActionId>,
    /// `π(state, action) / μ(state, action)`.
    pub rho: f64,
    /// `π(state, action)`.
    pub target_prob: f64,
    pub terminal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S = StateId> {
    pub transitions: Vec<Transition<S>>,
    /// Set when the step cap was reached without terminating.
    pub truncated: bool,
}

impl<S> Default for Trajectory<S> {
    fn default() -> Self {
        Self {
            transitions: Vec::new(),
            truncated: false,
        }
    }
}

impl<S: PartialEq + fmt::Debug> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn is_terminal(&self) -> bool {
        self.transitions.last().is_some_and(|t| t.terminal)
    }

    /// Discounted return from the first transition.
    pub fn discounted_return(&self, gamma: f64) -> f64 {
        self.transitions
            .iter()
            .rev()
            .fold(0.0, |g, t| t.reward + gamma * g)
    }

    /// Checks chaining and terminal placement.
    pub fn validate(&self) -> Result<()> {
        let n = self.transitions.len();
        for (k, t) in self.transitions.iter().enumerate() {
            if t.terminal && k + 1 != n {
                return Err(Error::Usage(format!("terminal transition at {k} of {n}")));
            }
            if t.terminal && t.next_action.is_some() {
                return Err(Error::Usage(format!(
                    "terminal transition {k} has a next action"
                )));
            }
            if t.rho < 0.0 {
                return Err(Error::Usage(format!("negative importance ratio at {k}")));
            }
            if let Some(next) = self.transitions.get(k + 1) {
                if next.state != t.next_state || Some(next.action) != t.next_action {
                    return Err(Error::Usage(format!(
                        "transition {k} does not chain into {}",
                        k + 1
                    )));
                }
            }
        }
        if self.truncated && self.is_terminal() {
            return Err(Error::Usage(
                "trajectory is both truncated and terminal".into(),
            ));
        }
        Ok(())
    }
}

/// Samples one episode with `behaviour`, recording importance ratios against
/// `target`.
///
/// Random draws happen in a fixed order: the start state, the first action,
/// then after each non-terminal step the next action. The online learners use
/// the same order, so the same seed reproduces the same experience.
pub fn sample_episode<E, R>(
    env: &E,
    behaviour: &DiscretePolicy,
    target: &DiscretePolicy,
    rng: &mut R,
    max_steps: usize,
) -> Result<Trajectory>
where
    E: Episodic<State = StateId>,
    R: Rng + ?Sized,
{
    if max_steps == 0 {
        return Err(Error::Usage("max_steps must be at least 1".into()));
    }
    behaviour.covers(target)?;
    let mut state = env.start(rng);
    let mut action = sample_action(behaviour, state, rng)?;
    let mut traj = Trajectory::default();
    loop {
        let step = env.step(&state, action, rng)?;
        let rho = behaviour.ratio_for(target, state, action)?;
        let next_action = if step.terminal {
            None
        } else {
            Some(sample_action(behaviour, step.next_state, rng)?)
        };
        traj.transitions.push(Transition {
            state,
            action,
            reward: step.reward,
            next_state: step.next_state,
            next_action,
            rho,
            target_prob: target.prob(state, action),
            terminal: step.terminal,
        });
        match next_action {
            None => break,
            Some(_) if traj.len() >= max_steps => {
                traj.truncated = true;
                break;
            }
            Some(a) => {
                state = step.next_state;
                action = a;
            }
        }
    }
    Ok(traj)
}

/// One `(reward, next_state)` outcome of a state-action pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub probability: f64,
    pub reward: f64,
    pub next_state: StateId,
}

/// Explicit finite model `p(r, s' | s, a)`.
#[derive(Clone, Debug)]
pub struct TabularMdp {
    dynamics: Vec<Vec<Vec<Outcome>>>,
    terminal: Vec<bool>,
    gamma: f64,
    start: Vec<(StateId, f64)>,
}

impl TabularMdp {
    /// `dynamics[s][a]` lists the outcomes of taking `a` in `s`. Terminal
    /// states keep their action slots but every slot must be empty.
    pub fn new(
        dynamics: Vec<Vec<Vec<Outcome>>>,
        terminal: Vec<bool>,
        gamma: f64,
        start: Vec<(StateId, f64)>,
    ) -> Result<Self> {
        let n = dynamics.len();
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if terminal.len() != n {
            return bad(format!("{} terminal flags for {n} states", terminal.len()));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return bad(format!("discount {gamma} outside [0, 1]"));
        }
        for (s, actions) in dynamics.iter().enumerate() {
            if terminal[s] {
                if actions.iter().any(|o| !o.is_empty()) {
                    return bad(format!("terminal state {s} has outgoing dynamics"));
                }
                continue;
            }
            if actions.is_empty() {
                return bad(format!("non-terminal state {s} has no actions"));
            }
            for (a, outcomes) in actions.iter().enumerate() {
                if outcomes
                    .iter()
                    .any(|o| o.next_state.0 >= n || !(o.probability >= 0.0))
                {
                    return bad(format!("({s},{a}) has an invalid outcome"));
                }
                let total: f64 = outcomes.iter().map(|o| o.probability).sum();
                if (total - 1.0).abs() > PROB_TOL {
                    return bad(format!("({s},{a}) outcome probabilities sum to {total}"));
                }
            }
        }
        let total: f64 = start.iter().map(|(_, p)| p).sum();
        if start.is_empty() || (total - 1.0).abs() > PROB_TOL || start.iter().any(|(s, _)| s.0 >= n)
        {
            return bad("start distribution is not a distribution over states".into());
        }
        Ok(Self {
            dynamics,
            terminal,
            gamma,
            start,
        })
    }

    pub fn state_count(&self) -> usize {
        self.dynamics.len()
    }

    pub fn action_count(&self, state: StateId) -> usize {
        self.dynamics[state.0].len()
    }

    pub fn is_terminal(&self, state: StateId) -> bool {
        self.terminal[state.0]
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn start_distribution(&self) -> &[(StateId, f64)] {
        &self.start
    }

    pub fn outcomes(&self, state: StateId, action: ActionId) -> &[Outcome] {
        &self.dynamics[state.0][action.0]
    }

    /// Non-terminal `(state, action)` pairs in row-major order.
    pub fn state_actions(&self) -> impl Iterator<Item = (StateId, ActionId)> + '_ {
        (0..self.state_count())
            .filter(|&s| !self.terminal[s])
            .flat_map(move |s| (0..self.dynamics[s].len()).map(move |a| (StateId(s), ActionId(a))))
    }

    /// Checks that `policy` has one normalised row per state with the right
    /// number of actions.
    pub fn check_policy(&self, policy: &DiscretePolicy) -> Result<()> {
        if policy.state_count() != self.state_count() {
            return Err(Error::InvalidPolicy(format!(
                "policy has {} rows, model {} states",
                policy.state_count(),
                self.state_count()
            )));
        }
        for s in 0..self.state_count() {
            let s = StateId(s);
            if !self.is_terminal(s) && policy.row(s).len() != self.action_count(s) {
                return Err(Error::InvalidPolicy(format!(
                    "state {s}: {} probabilities for {} actions",
                    policy.row(s).len(),
                    self.action_count(s)
                )));
            }
        }
        Ok(())
    }
}

fn pick<R: Rng + ?Sized, T>(items: &[T], prob: impl Fn(&T) -> f64, rng: &mut R) -> usize {
    if items.len() == 1 {
        return 0;
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, item) in items.iter().enumerate() {
        acc += prob(item);
        if u < acc {
            return i;
        }
    }
    items.len() - 1
}

/// Sampling from the model. Single-outcome distributions consume no random
/// draws, so deterministic models replay the same action stream as a
/// dedicated deterministic simulator.
impl Episodic for TabularMdp {
    type State = StateId;

    fn num_actions(&self, state: &StateId) -> usize {
        self.action_count(*state)
    }

    fn start<R: Rng + ?Sized>(&self, rng: &mut R) -> StateId {
        self.start[pick(&self.start, |(_, p)| *p, rng)].0
    }

    fn step<R: Rng + ?Sized>(
        &self,
        state: &StateId,
        action: ActionId,
        rng: &mut R,
    ) -> Result<Step<StateId>> {
        if self.is_terminal(*state) {
            return Err(Error::Usage(format!("step from terminal state {state}")));
        }
        if action.0 >= self.action_count(*state) {
            return Err(Error::Usage(format!(
                "action {action} invalid in state {state}"
            )));
        }
        let outcomes = self.outcomes(*state, action);
        let o = outcomes[pick(outcomes, |o| o.probability, rng)];
        Ok(Step {
            reward: o.reward,
            next_state: o.next_state,
            terminal: self.is_terminal(o.next_state),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn ratio_examples() {
        assert_eq!(importance_ratio(0.5, 0.25).unwrap(), 2.0);
        assert_eq!(importance_ratio(0.0, 0.25).unwrap(), 0.0);
        for p in [0.1, 0.25, 0.625, 1.0] {
            assert_eq!(importance_ratio(p, p).unwrap(), 1.0);
        }
        assert!(matches!(
            importance_ratio(0.5, 0.0),
            Err(Error::InvalidSupport { .. })
        ));
    }

    #[test]
    fn policy_validation() {
        assert!(DiscretePolicy::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(DiscretePolicy::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(DiscretePolicy::new(vec![vec![]]).is_err());
        let mu = DiscretePolicy::new(vec![vec![1.0, 0.0]]).unwrap();
        let pi = DiscretePolicy::new(vec![vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            mu.covers(&pi),
            Err(Error::InvalidSupport {
                state: Some(0),
                action: 1
            })
        ));
        assert!(pi.covers(&mu).is_ok());
    }

    #[test]
    fn one_hot_row_is_deterministic() {
        let mut rng = seeded(1);
        for _ in 0..1000 {
            assert_eq!(
                sample_from_row(&[0.0, 1.0, 0.0, 0.0], &mut rng),
                ActionId(1)
            );
        }
    }

    #[test]
    fn uniform_row_frequencies() {
        let mut rng = seeded(2);
        let draws = 1_000_000usize;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            counts[sample_from_row(&[0.25; 4], &mut rng).0] += 1;
        }
        let sigma = (draws as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!(
                (c as f64 - draws as f64 * 0.25).abs() < 3.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn fixed_seed_reproduces_actions() {
        let policy = DiscretePolicy::uniform(3, 4);
        let run = |seed| {
            let mut rng = seeded(seed);
            (0..50)
                .map(|i| sample_action(&policy, StateId(i % 3), &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
        assert!(sample_action(&policy, StateId(3), &mut seeded(0)).is_err());
    }

    fn two_state_loop() -> TabularMdp {
        // state 0 loops forever on action 0, action 1 terminates
        let o = |s, r| Outcome {
            probability: 1.0,
            reward: r,
            next_state: StateId(s),
        };
        TabularMdp::new(
            vec![
                vec![vec![o(0, -1.0)], vec![o(1, -1.0)]],
                vec![vec![], vec![]],
            ],
            vec![false, true],
            1.0,
            vec![(StateId(0), 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn truncation_at_cap() {
        let mdp = two_state_loop();
        let looping = DiscretePolicy::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let traj = sample_episode(&mdp, &looping, &looping, &mut seeded(0), 5).unwrap();
        assert_eq!(traj.len(), 5);
        assert!(traj.truncated);
        assert!(!traj.is_terminal());
        traj.validate().unwrap();
        assert!(sample_episode(&mdp, &looping, &looping, &mut seeded(0), 0).is_err());
    }

    #[test]
    fn forced_termination() {
        let mdp = two_state_loop();
        let exit = DiscretePolicy::new(vec![vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        let traj = sample_episode(&mdp, &exit, &exit, &mut seeded(0), 10).unwrap();
        assert_eq!(traj.len(), 1);
        assert!(traj.is_terminal());
        assert_eq!(traj.transitions[0].reward, -1.0);
        assert_eq!(traj.transitions[0].next_action, None);
    }

    #[test]
    fn model_validation() {
        let o = Outcome {
            probability: 0.5,
            reward: 0.0,
            next_state: StateId(0),
        };
        let r = TabularMdp::new(
            vec![vec![vec![o]]],
            vec![false],
            1.0,
            vec![(StateId(0), 1.0)],
        );
        assert!(r.is_err());
        let r = TabularMdp::new(vec![vec![vec![]]], vec![true], 1.5, vec![(StateId(0), 1.0)]);
        assert!(r.is_err());
    }
}
