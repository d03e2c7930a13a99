//! Multi-step temporal-difference learning with per-decision control variates.
//!
//! The crate is organised bottom-up:
//!
//! * [`mdp`]: states, actions, policies, importance ratios, trajectories and
//!   explicit tabular models.
//! * [`env`]: the 5x5 grid world and mountain car benchmarks.
//! * [`approx`]: tabular and tile-coded linear action-value functions.
//! * [`returns`]: every n-step return target (importance-sampled Sarsa,
//!   Expected Sarsa, control-variate Sarsa, Tree-backup, state-value control
//!   variate) plus the λ-return forms used to check them.
//! * [`learner`]: online n-step prediction and control loops.
//! * [`oracle`]: exact policy evaluation, RMS error and exhaustive expectation
//!   enumeration.
//! * [`harness`]: seeded parameter sweeps, aggregation and CSV output.

pub mod approx;
pub mod env;
pub mod error;
pub mod harness;
pub mod learner;
pub mod mdp;
pub mod oracle;
pub mod returns;
pub mod rng;

pub use error::{Error, Result};
