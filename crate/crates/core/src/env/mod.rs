//! Benchmark environments.

mod gridworld;
mod mountain_car;

pub use gridworld::{Cell, Direction, GridWorld, GRID_STEP_CAP};
pub use mountain_car::{
    MountainCar, MountainCarState, Throttle, MOUNTAIN_CAR_STEP_CAP, POSITION_RANGE, VELOCITY_RANGE,
};
