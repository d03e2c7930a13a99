use super::ActionValueFunction;
use crate::error::{Error, Result};
use crate::mdp::{ActionId, StateId};

#[derive(Clone, Debug, PartialEq)]
pub struct TabularQ {
    values: Vec<f64>,
    num_actions: usize,
}

impl TabularQ {
    pub fn new(num_states: usize, num_actions: usize, init: f64) -> Self {
        Self {
            values: vec![init; num_states * num_actions],
            num_actions,
        }
    }

    /// Builds a table from `rows[state][action]`; all rows must be equally long.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let num_actions = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == num_actions), "ragged table");
        Self {
            values: rows.concat(),
            num_actions,
        }
    }

    pub fn num_states(&self) -> usize {
        self.values.len().checked_div(self.num_actions).unwrap_or(0)
    }

    pub fn get(&self, state: StateId, action: ActionId) -> f64 {
        self.values[state.0 * self.num_actions + action.0]
    }

    pub fn set(&mut self, state: StateId, action: ActionId, value: f64) {
        self.values[state.0 * self.num_actions + action.0] = value;
    }

    pub fn row(&self, state: StateId) -> &[f64] {
        let k = state.0 * self.num_actions;
        &self.values[k..k + self.num_actions]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl ActionValueFunction<StateId> for TabularQ {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn q_value(&self, state: &StateId, action: ActionId) -> f64 {
        self.get(*state, action)
    }

    fn action_values(&self, state: &StateId) -> Vec<f64> {
        self.row(*state).to_vec()
    }

    fn expected_q(&self, state: &StateId, row: &[f64]) -> f64 {
        super::dot(row, self.row(*state))
    }

    fn apply_update(
        &mut self,
        state: &StateId,
        action: ActionId,
        step_size: f64,
        target: f64,
    ) -> Result<f64> {
        if !target.is_finite() {
            return Err(Error::NonFinite(target));
        }
        let k = state.0 * self.num_actions + action.0;
        let old = self.values[k];
        self.values[k] = old + step_size * (target - old);
        Ok(self.values[k])
    }
}
