use crate::approx::ActionValueFunction;
use crate::error::{Error, Result};
use crate::mdp::{DiscretePolicy, StateId, Trajectory};

/// Value-function and policy quantities at one decision point `(S_k, A_k)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Decision {
    /// `π(S_k, A_k) / μ(S_k, A_k)`.
    pub rho: f64,
    /// `π(S_k, A_k)`.
    pub target_prob: f64,
    /// `Q(S_k, A_k)`.
    pub q_taken: f64,
    /// `E_π[Q(S_k, ·)]`.
    pub q_expected: f64,
    /// `V(S_k)`, read only by the state-value estimator.
    pub state_value: f64,
}

/// A window of experience starting at decision `t`.
///
/// `rewards[k]` is the reward following `decisions[k]`. When the window ends
/// because the episode terminated, there is one decision per reward; otherwise
/// there is a trailing bootstrap decision.
#[derive(Clone, Copy, Debug)]
pub struct ReturnContext<'a> {
    decisions: &'a [Decision],
    rewards: &'a [f64],
    terminal: bool,
}

impl<'a> ReturnContext<'a> {
    pub fn new(decisions: &'a [Decision], rewards: &'a [f64], terminal: bool) -> Result<Self> {
        if rewards.is_empty() {
            return Err(Error::Usage("return window has no rewards".into()));
        }
        let expected = rewards.len() + usize::from(!terminal);
        if decisions.len() != expected {
            return Err(Error::Usage(format!(
                "{} rewards need {expected} decisions, got {}",
                rewards.len(),
                decisions.len()
            )));
        }
        Ok(Self {
            decisions,
            rewards,
            terminal,
        })
    }

    pub fn decisions(&self) -> &'a [Decision] {
        self.decisions
    }

    pub fn rewards(&self) -> &'a [f64] {
        self.rewards
    }

    pub fn terminal(&self) -> bool {
        self.terminal
    }

    /// Number of sampled rewards in the window.
    pub fn horizon(&self) -> usize {
        self.rewards.len()
    }

    /// The bootstrap decision `S_{t+h}`, absent when the window ends in termination.
    pub fn bootstrap(&self) -> Option<&'a Decision> {
        if self.terminal {
            None
        } else {
            self.decisions.last()
        }
    }
}

/// A complete, terminated episode with a frozen value function, used for the
/// λ-return forms.
#[derive(Clone, Debug, PartialEq)]
pub struct FrozenEpisode {
    decisions: Vec<Decision>,
    rewards: Vec<f64>,
}

impl FrozenEpisode {
    pub fn new(decisions: Vec<Decision>, rewards: Vec<f64>) -> Result<Self> {
        if rewards.is_empty() || decisions.len() != rewards.len() {
            return Err(Error::Usage(format!(
                "frozen episode needs one decision per reward ({} vs {})",
                decisions.len(),
                rewards.len()
            )));
        }
        Ok(Self { decisions, rewards })
    }

    /// Freezes `q` along a terminated trajectory. State values are taken as
    /// `E_π[Q(s, ·)]`.
    pub fn from_trajectory<Q>(traj: &Trajectory, q: &Q, target: &DiscretePolicy) -> Result<Self>
    where
        Q: ActionValueFunction<StateId>,
    {
        if !traj.is_terminal() {
            return Err(Error::Usage("λ-returns need a terminated episode".into()));
        }
        let decisions = traj
            .transitions
            .iter()
            .map(|tr| {
                let expected = q.expected_q(&tr.state, target.row(tr.state));
                Decision {
                    rho: tr.rho,
                    target_prob: tr.target_prob,
                    q_taken: q.q_value(&tr.state, tr.action),
                    q_expected: expected,
                    state_value: expected,
                }
            })
            .collect();
        let rewards = traj.transitions.iter().map(|tr| tr.reward).collect();
        Self::new(decisions, rewards)
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Window for `Ĝ_{t:t+n}`, cut at the end of the episode.
    pub fn window(&self, t: usize, n: usize) -> Result<ReturnContext<'_>> {
        let len = self.len();
        if t >= len || n == 0 {
            return Err(Error::Usage(format!(
                "window t={t}, n={n} in episode of length {len}"
            )));
        }
        if t + n < len {
            ReturnContext::new(&self.decisions[t..=t + n], &self.rewards[t..t + n], false)
        } else {
            ReturnContext::new(&self.decisions[t..], &self.rewards[t..], true)
        }
    }
}
