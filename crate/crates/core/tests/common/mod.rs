#![allow(dead_code)]

use std::path::PathBuf;

use pdcv::approx::TabularQ;
use pdcv::mdp::{ActionId, DiscretePolicy, Outcome, StateId, TabularMdp};
use pdcv::returns::Decision;
use pdcv::rng::{seeded, RunRng};
use rand::Rng;

pub fn rng(seed: u64) -> RunRng {
    seeded(seed)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// `(state, action) -> q` rows of a fixture table.
pub fn load_q_fixture(name: &str) -> Vec<(StateId, ActionId, f64)> {
    let mut reader = csv::Reader::from_path(fixture(name)).expect("fixture exists");
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (
                StateId(r[0].parse().unwrap()),
                ActionId(r[1].parse().unwrap()),
                r[2].parse().unwrap(),
            )
        })
        .collect()
}

/// A probability row with every entry at least `floor`.
pub fn random_row<R: Rng>(rng: &mut R, len: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let spare = 1.0 - floor * len as f64;
    let mut row: Vec<f64> = raw.iter().map(|x| floor + spare * x / total).collect();
    let fix: f64 = row[1..].iter().sum();
    row[0] = 1.0 - fix;
    row
}

pub fn random_policy<R: Rng>(
    rng: &mut R,
    states: usize,
    actions: usize,
    floor: f64,
) -> DiscretePolicy {
    DiscretePolicy::new(
        (0..states)
            .map(|_| random_row(rng, actions, floor))
            .collect(),
    )
    .unwrap()
}

/// `live` non-terminal states plus one absorbing terminal state (the last
/// index). Every pair reaches every state, terminating with probability at
/// least 0.1, with rewards in [−2, 1].
pub fn random_mdp<R: Rng>(rng: &mut R, live: usize, actions: usize, gamma: f64) -> TabularMdp {
    let states = live + 1;
    let mut dynamics = Vec::with_capacity(states);
    for _ in 0..live {
        let mut per_action = Vec::with_capacity(actions);
        for _ in 0..actions {
            let mut probs = random_row(rng, states, 0.02);
            let shortfall = (0.1 - probs[live]).max(0.0);
            if shortfall > 0.0 {
                let scale = (1.0 - 0.1) / (1.0 - probs[live]);
                for p in &mut probs[..live] {
                    *p *= scale;
                }
                probs[live] = 1.0 - probs[..live].iter().sum::<f64>();
            }
            per_action.push(
                probs
                    .iter()
                    .enumerate()
                    .map(|(s, &p)| Outcome {
                        probability: p,
                        reward: rng.gen_range(-2.0..1.0),
                        next_state: StateId(s),
                    })
                    .collect(),
            );
        }
        dynamics.push(per_action);
    }
    dynamics.push(vec![Vec::new(); actions]);
    let mut terminal = vec![false; states];
    terminal[live] = true;
    TabularMdp::new(dynamics, terminal, gamma, vec![(StateId(0), 1.0)]).unwrap()
}

pub fn random_q<R: Rng>(rng: &mut R, states: usize, actions: usize) -> TabularQ {
    let rows: Vec<Vec<f64>> = (0..states)
        .map(|_| (0..actions).map(|_| rng.gen_range(-5.0..5.0)).collect())
        .collect();
    TabularQ::from_rows(&rows)
}

/// A decision drawn from random 4-action rows: returns the decision and
/// the rows that produced it.
pub fn random_decision<R: Rng>(rng: &mut R) -> (Decision, Vec<f64>, Vec<f64>, usize) {
    let pi = random_row(rng, 4, 0.0);
    let mu = random_row(rng, 4, 0.05);
    let q: Vec<f64> = (0..4).map(|_| rng.gen_range(-10.0..10.0)).collect();
    let a = rng.gen_range(0..4);
    let expected: f64 = pi.iter().zip(&q).map(|(p, v)| p * v).sum();
    let d = Decision {
        rho: pi[a] / mu[a],
        target_prob: pi[a],
        q_taken: q[a],
        q_expected: expected,
        state_value: rng.gen_range(-10.0..10.0),
    };
    (d, pi, q, a)
}

/// Random return window: `h` rewards, terminal or bootstrapped.
pub fn random_window<R: Rng>(rng: &mut R, h: usize, terminal: bool) -> (Vec<Decision>, Vec<f64>) {
    let decisions = (0..h + usize::from(!terminal))
        .map(|_| random_decision(rng).0)
        .collect();
    let rewards = (0..h).map(|_| rng.gen_range(-2.0..2.0)).collect();
    (decisions, rewards)
}

/// Ten non-terminal states in a line with the terminal at index 10. Action 0
/// moves right, action 1 moves left (bouncing off state 0); every step pays
/// `−1 − 0.1·s`.
pub fn chain_mdp(gamma: f64) -> TabularMdp {
    let live = 10;
    let mut dynamics = Vec::new();
    for s in 0..live {
        let reward = -1.0 - 0.1 * s as f64;
        let go = |next: usize| {
            vec![Outcome {
                probability: 1.0,
                reward,
                next_state: StateId(next),
            }]
        };
        dynamics.push(vec![go(s + 1), go(s.saturating_sub(1))]);
    }
    dynamics.push(vec![Vec::new(), Vec::new()]);
    let mut terminal = vec![false; live + 1];
    terminal[live] = true;
    TabularMdp::new(dynamics, terminal, gamma, vec![(StateId(0), 1.0)]).unwrap()
}
