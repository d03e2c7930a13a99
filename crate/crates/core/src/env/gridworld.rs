use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::{ActionId, Episodic, Outcome, StateId, Step, TabularMdp};

/// Step cap applied to grid-world episodes; truncation is recorded.
pub const GRID_STEP_CAP: usize = 100_000;

/// A grid cell. `(0, 0)` is the top-left corner; rows grow southwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

impl Cell {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Self::North, Self::East, Self::South, Self::West];

    pub fn from_action(action: ActionId) -> Option<Self> {
        Self::ALL.get(action.0).copied()
    }

    pub fn action(self) -> ActionId {
        ActionId(self as usize)
    }

    pub fn opposite(self) -> Self {
        Self::ALL[(self as usize + 2) % 4]
    }
}

/// Deterministic grid world with terminal cells in the top-left and
/// bottom-right corners, a reward of -1 per move and no discounting. Moving
/// into a wall leaves the agent in place.
#[derive(Clone, Debug)]
pub struct GridWorld {
    width: usize,
    height: usize,
}

impl Default for GridWorld {
    fn default() -> Self {
        Self::new()
    }
}

impl GridWorld {
    pub fn new() -> Self {
        Self {
            width: 5,
            height: 5,
        }
    }

    /// Other sizes exist for tests only.
    #[doc(hidden)]
    pub fn with_size(width: usize, height: usize) -> Self {
        assert!(width >= 2 && height >= 2);
        Self { width, height }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn state_count(&self) -> usize {
        self.width * self.height
    }

    pub fn start_cell(&self) -> Cell {
        Cell::new(self.width / 2, self.height / 2)
    }

    pub fn terminal_cells(&self) -> [Cell; 2] {
        [Cell::new(0, 0), Cell::new(self.width - 1, self.height - 1)]
    }

    pub fn is_terminal(&self, cell: Cell) -> bool {
        self.terminal_cells().contains(&cell)
    }

    pub fn state_of(&self, cell: Cell) -> StateId {
        StateId(cell.row * self.width + cell.col)
    }

    pub fn cell_of(&self, state: StateId) -> Cell {
        Cell::new(state.0 % self.width, state.0 / self.width)
    }

    /// 180° rotation, which swaps the two terminal corners.
    pub fn rotate(&self, cell: Cell) -> Cell {
        Cell::new(self.width - 1 - cell.col, self.height - 1 - cell.row)
    }

    /// Moves one cell; returns `(reward, next_cell, terminal)`.
    pub fn step_cell(&self, cell: Cell, direction: Direction) -> Result<(f64, Cell, bool)> {
        if cell.col >= self.width || cell.row >= self.height {
            return Err(Error::Usage(format!("cell {cell:?} outside the grid")));
        }
        if self.is_terminal(cell) {
            return Err(Error::Usage(format!("step from terminal cell {cell:?}")));
        }
        let Cell { col, row } = cell;
        let next = match direction {
            Direction::North if row > 0 => Cell::new(col, row - 1),
            Direction::South if row + 1 < self.height => Cell::new(col, row + 1),
            Direction::West if col > 0 => Cell::new(col - 1, row),
            Direction::East if col + 1 < self.width => Cell::new(col + 1, row),
            _ => cell,
        };
        Ok((-1.0, next, self.is_terminal(next)))
    }

    /// The explicit model: one successor with probability one for each
    /// non-terminal state-action pair.
    pub fn model(&self) -> TabularMdp {
        let dynamics = (0..self.state_count())
            .map(|s| {
                let cell = self.cell_of(StateId(s));
                Direction::ALL
                    .iter()
                    .map(|&d| {
                        if self.is_terminal(cell) {
                            return Vec::new();
                        }
                        let (reward, next, _) = self.step_cell(cell, d).expect("non-terminal cell");
                        vec![Outcome {
                            probability: 1.0,
                            reward,
                            next_state: self.state_of(next),
                        }]
                    })
                    .collect()
            })
            .collect();
        let terminal = (0..self.state_count())
            .map(|s| self.is_terminal(self.cell_of(StateId(s))))
            .collect();
        TabularMdp::new(
            dynamics,
            terminal,
            1.0,
            vec![(self.state_of(self.start_cell()), 1.0)],
        )
        .expect("grid world model is well formed")
    }
}

impl Episodic for GridWorld {
    type State = StateId;

    fn num_actions(&self, _state: &StateId) -> usize {
        4
    }

    fn start<R: Rng + ?Sized>(&self, _rng: &mut R) -> StateId {
        self.state_of(self.start_cell())
    }

    fn step<R: Rng + ?Sized>(
        &self,
        state: &StateId,
        action: ActionId,
        _rng: &mut R,
    ) -> Result<Step<StateId>> {
        let direction = Direction::from_action(action)
            .ok_or_else(|| Error::Usage(format!("grid world has no action {action}")))?;
        let (reward, next, terminal) = self.step_cell(self.cell_of(*state), direction)?;
        Ok(Step {
            reward,
            next_state: self.state_of(next),
            terminal,
        })
    }
}
