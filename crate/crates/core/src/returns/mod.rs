//! n-step return targets and the λ-return forms used to cross-check them.
//!
//! All estimators consume a [`ReturnContext`]: the rewards of a window of
//! experience plus, for each decision point in the window, the handful of
//! value-function numbers the recursions need. Keeping the value function out
//! of the recursion lets the same code serve online learners (values read at
//! update time), frozen-episode analysis and exhaustive enumeration.

mod context;
mod lambda;
mod nstep;
mod spec;

pub use context::{Decision, FrozenEpisode, ReturnContext};
pub use lambda::{lambda_return_tderror_sum, lambda_return_weighted, LambdaForm};
pub use nstep::{
    estimate, nstep_cv_sarsa_return, nstep_expected_sarsa_return, nstep_sarsa_is_return,
    nstep_state_cv_return, nstep_tree_backup_return, nstep_tree_backup_return_explicit,
    ActionDetail,
};
pub use spec::{EstimatorVariant, ReturnEstimatorSpec, DEFAULT_CV_COEFFICIENT};
