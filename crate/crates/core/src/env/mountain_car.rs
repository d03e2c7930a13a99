use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::{ActionId, Episodic, Step};

/// Step cap applied to mountain-car episodes; truncation is recorded.
pub const MOUNTAIN_CAR_STEP_CAP: usize = 20_000;

pub const POSITION_RANGE: (f64, f64) = (-1.2, 0.5);
pub const VELOCITY_RANGE: (f64, f64) = (-0.07, 0.07);
const GOAL: f64 = 0.5;
const THRUST: f64 = 0.001;
const GRAVITY: f64 = 0.0025;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MountainCarState {
    pub position: f64,
    pub velocity: f64,
}

impl MountainCarState {
    pub fn observation(&self) -> [f64; 2] {
        [self.position, self.velocity]
    }
}

/// Reverse, coast, forward. Action index `i` maps to throttle `i - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Throttle {
    Reverse,
    Coast,
    Forward,
}

impl Throttle {
    pub fn from_action(action: ActionId) -> Option<Self> {
        [Self::Reverse, Self::Coast, Self::Forward]
            .get(action.0)
            .copied()
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Reverse => -1.0,
            Self::Coast => 0.0,
            Self::Forward => 1.0,
        }
    }
}

/// Classic underpowered car in a valley: reward -1 per step, no discounting,
/// episode ends once the car reaches position 0.5.
#[derive(Clone, Copy, Debug, Default)]
pub struct MountainCar;

impl MountainCar {
    pub fn step_state(
        &self,
        state: MountainCarState,
        throttle: Throttle,
    ) -> (f64, MountainCarState, bool) {
        let MountainCarState { position, velocity } = state;
        let mut v = (velocity + THRUST * throttle.value() - GRAVITY * (3.0 * position).cos())
            .clamp(VELOCITY_RANGE.0, VELOCITY_RANGE.1);
        let x = (position + v).clamp(POSITION_RANGE.0, POSITION_RANGE.1);
        if x == POSITION_RANGE.0 {
            v = 0.0;
        }
        (
            -1.0,
            MountainCarState {
                position: x,
                velocity: v,
            },
            x >= GOAL,
        )
    }

    /// Position uniform in `[-0.6, -0.4)`, at rest.
    pub fn start_state<R: Rng + ?Sized>(&self, rng: &mut R) -> MountainCarState {
        MountainCarState {
            position: rng.gen_range(-0.6..-0.4),
            velocity: 0.0,
        }
    }
}

impl Episodic for MountainCar {
    type State = MountainCarState;

    fn num_actions(&self, _state: &MountainCarState) -> usize {
        3
    }

    fn start<R: Rng + ?Sized>(&self, rng: &mut R) -> MountainCarState {
        self.start_state(rng)
    }

    fn step<R: Rng + ?Sized>(
        &self,
        state: &MountainCarState,
        action: ActionId,
        _rng: &mut R,
    ) -> Result<Step<MountainCarState>> {
        let throttle = Throttle::from_action(action)
            .ok_or_else(|| Error::Usage(format!("mountain car has no action {action}")))?;
        let (reward, next_state, terminal) = self.step_state(*state, throttle);
        Ok(Step {
            reward,
            next_state,
            terminal,
        })
    }
}
