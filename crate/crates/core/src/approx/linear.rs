use super::{ActionValueFunction, TileCoder};
use crate::env::MountainCarState;
use crate::error::{Error, Result};
use crate::mdp::ActionId;

/// Action values linear in tile-coded features, one weight block per action.
///
/// User-facing step sizes are divided by the number of tilings inside
/// [`apply_update`](ActionValueFunction::apply_update), so a step size of `α`
/// moves the queried value by the same fraction as in the tabular case.
#[derive(Clone, Debug)]
pub struct LinearQ {
    coder: TileCoder,
    weights: Vec<f64>,
    num_actions: usize,
}

impl LinearQ {
    /// Weights start at `init / tilings`, so every query initially returns `init`.
    pub fn new(coder: TileCoder, num_actions: usize, init: f64) -> Self {
        let w = init / coder.tilings() as f64;
        Self {
            weights: vec![w; coder.feature_count() * num_actions],
            coder,
            num_actions,
        }
    }

    pub fn coder(&self) -> &TileCoder {
        &self.coder
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    fn block(&self, action: ActionId) -> usize {
        action.0 * self.coder.feature_count()
    }

    fn value_at(&self, tiles: &[usize], action: ActionId) -> f64 {
        let base = self.block(action);
        tiles.iter().map(|&i| self.weights[base + i]).sum()
    }

    pub fn q_at(&self, observation: &[f64], action: ActionId) -> f64 {
        self.value_at(&self.coder.active_tiles(observation), action)
    }

    pub fn values_at(&self, observation: &[f64]) -> Vec<f64> {
        let tiles = self.coder.active_tiles(observation);
        (0..self.num_actions)
            .map(|a| self.value_at(&tiles, ActionId(a)))
            .collect()
    }

    pub fn update_at(
        &mut self,
        observation: &[f64],
        action: ActionId,
        step_size: f64,
        target: f64,
    ) -> Result<f64> {
        if !target.is_finite() {
            return Err(Error::NonFinite(target));
        }
        let tiles = self.coder.active_tiles(observation);
        let old = self.value_at(&tiles, action);
        let delta = step_size / self.coder.tilings() as f64 * (target - old);
        let base = self.block(action);
        for &i in &tiles {
            self.weights[base + i] += delta;
        }
        Ok(self.value_at(&tiles, action))
    }
}

impl ActionValueFunction<[f64]> for LinearQ {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn q_value(&self, state: &[f64], action: ActionId) -> f64 {
        self.q_at(state, action)
    }

    fn action_values(&self, state: &[f64]) -> Vec<f64> {
        self.values_at(state)
    }

    fn apply_update(
        &mut self,
        state: &[f64],
        action: ActionId,
        step_size: f64,
        target: f64,
    ) -> Result<f64> {
        self.update_at(state, action, step_size, target)
    }
}

impl ActionValueFunction<MountainCarState> for LinearQ {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn q_value(&self, state: &MountainCarState, action: ActionId) -> f64 {
        self.q_at(&state.observation(), action)
    }

    fn action_values(&self, state: &MountainCarState) -> Vec<f64> {
        self.values_at(&state.observation())
    }

    fn apply_update(
        &mut self,
        state: &MountainCarState,
        action: ActionId,
        step_size: f64,
        target: f64,
    ) -> Result<f64> {
        self.update_at(&state.observation(), action, step_size, target)
    }
}
