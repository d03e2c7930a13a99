//! Ground truth for tabular problems: iterative policy evaluation, RMS error
//! and exact expectations of return estimators by exhaustive enumeration.

use crate::approx::{ActionValueFunction, TabularQ};
use crate::error::{Error, Result};
use crate::mdp::{ActionId, DiscretePolicy, StateId, TabularMdp};
use crate::returns::{estimate, Decision, ReturnContext, ReturnEstimatorSpec};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 1_000_000;
pub const DEFAULT_BRANCH_CAP: usize = 1_000_000;

/// `q_π` for a tabular model. Terminal states hold zeros.
#[derive(Clone, Debug)]
pub struct ExactQTable {
    pub q: TabularQ,
    /// Largest Bellman residual over non-terminal pairs.
    pub residual: f64,
    pub sweeps: usize,
    pub policy: DiscretePolicy,
    pairs: Vec<(StateId, ActionId)>,
}

impl ExactQTable {
    pub fn get(&self, state: StateId, action: ActionId) -> f64 {
        self.q.get(state, action)
    }

    /// Non-terminal state-action pairs, the support of the RMS metric.
    pub fn pairs(&self) -> &[(StateId, ActionId)] {
        &self.pairs
    }
}

fn backup(
    model: &TabularMdp,
    policy: &DiscretePolicy,
    q: &TabularQ,
    s: StateId,
    a: ActionId,
) -> f64 {
    let gamma = model.gamma();
    model
        .outcomes(s, a)
        .iter()
        .map(|o| {
            let next = if model.is_terminal(o.next_state) {
                0.0
            } else {
                q.expected_q(&o.next_state, policy.row(o.next_state))
            };
            o.probability * (o.reward + gamma * next)
        })
        .sum()
}

/// Largest `|Q(s,a) − Σ p(r,s'|s,a)(r + γ Σ_a' π(s',a') Q(s',a'))|`.
pub fn bellman_residual(model: &TabularMdp, policy: &DiscretePolicy, q: &TabularQ) -> f64 {
    model
        .state_actions()
        .map(|(s, a)| (q.get(s, a) - backup(model, policy, q, s, a)).abs())
        .fold(0.0, f64::max)
}

pub fn exact_q(model: &TabularMdp, policy: &DiscretePolicy, tol: f64) -> Result<ExactQTable> {
    exact_q_with_cap(model, policy, tol, DEFAULT_MAX_SWEEPS)
}

/// In-place (Gauss–Seidel) sweeps of the Bellman equation for `q_π` until
/// both the largest change in a sweep and the Bellman residual drop below
/// `tol`.
pub fn exact_q_with_cap(
    model: &TabularMdp,
    policy: &DiscretePolicy,
    tol: f64,
    max_sweeps: usize,
) -> Result<ExactQTable> {
    if !(tol > 0.0) {
        return Err(Error::Usage(format!("tolerance {tol} must be positive")));
    }
    model.check_policy(policy)?;
    let actions = (0..model.state_count())
        .map(|s| model.action_count(StateId(s)))
        .max()
        .unwrap_or(0);
    let mut q = TabularQ::new(model.state_count(), actions, 0.0);
    let pairs: Vec<_> = model.state_actions().collect();
    let mut last_change = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        last_change = 0.0;
        for &(s, a) in &pairs {
            let new = backup(model, policy, &q, s, a);
            last_change = f64::max(last_change, (new - q.get(s, a)).abs());
            q.set(s, a, new);
        }
        if !last_change.is_finite() {
            break;
        }
        if last_change < tol {
            let residual = bellman_residual(model, policy, &q);
            if residual < tol {
                return Ok(ExactQTable {
                    q,
                    residual,
                    sweeps: sweep,
                    policy: policy.clone(),
                    pairs,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        sweeps: max_sweeps,
        last_change,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RmsError {
    pub value: f64,
    /// Set when the estimate was non-finite or beyond the sentinel and has
    /// been replaced by it.
    pub diverged: bool,
}

/// Uniformly weighted RMS error over the non-terminal pairs of `truth`.
/// Non-finite estimates (or errors above `sentinel`) report `sentinel`.
pub fn rms_error<Q: ActionValueFunction<StateId>>(
    q: &Q,
    truth: &ExactQTable,
    sentinel: f64,
) -> RmsError {
    let pairs = truth.pairs();
    let mut sum = 0.0;
    for &(s, a) in pairs {
        let d = q.q_value(&s, a) - truth.get(s, a);
        sum += d * d;
    }
    let value = (sum / pairs.len() as f64).sqrt();
    if value.is_finite() && value <= sentinel {
        RmsError {
            value,
            diverged: false,
        }
    } else {
        RmsError {
            value: sentinel,
            diverged: true,
        }
    }
}

struct Enumerator<'a, Q> {
    model: &'a TabularMdp,
    behaviour: &'a DiscretePolicy,
    target: &'a DiscretePolicy,
    spec: &'a ReturnEstimatorSpec,
    q: &'a Q,
    cap: usize,
    branches: usize,
    decisions: Vec<Decision>,
    pairs: Vec<(StateId, ActionId)>,
    rewards: Vec<f64>,
}

impl<Q: ActionValueFunction<StateId>> Enumerator<'_, Q> {
    fn decision(&self, s: StateId, a: ActionId) -> Decision {
        let expected = self.q.expected_q(&s, self.target.row(s));
        Decision {
            rho: self.target.prob(s, a) / self.behaviour.prob(s, a),
            target_prob: self.target.prob(s, a),
            q_taken: self.q.q_value(&s, a),
            q_expected: expected,
            state_value: expected,
        }
    }

    fn leaf(&mut self, terminal: bool) -> Result<f64> {
        self.branches += 1;
        if self.branches > self.cap {
            return Err(Error::TooManyBranches { cap: self.cap });
        }
        let ctx = ReturnContext::new(&self.decisions, &self.rewards, terminal)?;
        Ok(estimate(self.spec, &ctx))
    }

    /// Expected return over all continuations of the current partial path.
    fn expand(&mut self) -> Result<f64> {
        let (s, a) = *self.pairs.last().expect("path starts with the start pair");
        let mut total = 0.0;
        for o in self.model.outcomes(s, a) {
            if o.probability == 0.0 {
                continue;
            }
            self.rewards.push(o.reward);
            let value = if self.model.is_terminal(o.next_state) {
                self.leaf(true)?
            } else {
                let mut inner = 0.0;
                let next = o.next_state;
                for a2 in 0..self.model.action_count(next) {
                    let a2 = ActionId(a2);
                    let mu = self.behaviour.prob(next, a2);
                    if mu == 0.0 {
                        continue;
                    }
                    self.decisions.push(self.decision(next, a2));
                    self.pairs.push((next, a2));
                    let v = if self.rewards.len() == self.spec.n {
                        self.leaf(false)
                    } else {
                        self.expand()
                    };
                    self.decisions.pop();
                    self.pairs.pop();
                    inner += mu * v?;
                }
                inner
            };
            self.rewards.pop();
            total += o.probability * value;
        }
        Ok(total)
    }
}

/// Exact expectation, under the model and the behaviour policy, of the
/// estimator's return for the pair `start` with `q` held fixed.
///
/// Every branch is evaluated with the same estimator code the learners use.
pub fn enumerate_expected_return<Q: ActionValueFunction<StateId>>(
    model: &TabularMdp,
    behaviour: &DiscretePolicy,
    target: &DiscretePolicy,
    spec: &ReturnEstimatorSpec,
    q: &Q,
    start: (StateId, ActionId),
) -> Result<f64> {
    enumerate_expected_return_with_cap(model, behaviour, target, spec, q, start, DEFAULT_BRANCH_CAP)
}

pub fn enumerate_expected_return_with_cap<Q: ActionValueFunction<StateId>>(
    model: &TabularMdp,
    behaviour: &DiscretePolicy,
    target: &DiscretePolicy,
    spec: &ReturnEstimatorSpec,
    q: &Q,
    start: (StateId, ActionId),
    cap: usize,
) -> Result<f64> {
    model.check_policy(behaviour)?;
    model.check_policy(target)?;
    behaviour.covers(target)?;
    let (s, a) = start;
    if model.is_terminal(s) || a.0 >= model.action_count(s) {
        return Err(Error::Usage(format!(
            "start pair ({s}, {a}) is not a non-terminal pair"
        )));
    }
    if behaviour.prob(s, a) <= 0.0 {
        return Err(Error::InvalidSupport {
            state: Some(s.0),
            action: a.0,
        });
    }
    let mut e = Enumerator {
        model,
        behaviour,
        target,
        spec,
        q,
        cap,
        branches: 0,
        decisions: Vec::new(),
        pairs: vec![start],
        rewards: Vec::new(),
    };
    e.decisions.push(e.decision(s, a));
    e.expand()
}
