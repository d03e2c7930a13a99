//! Action-value representations.
//!
//! [`TabularQ`] stores one entry per state-action pair; [`LinearQ`] is linear
//! in tile-coded features. Both answer point queries, expectations under a
//! policy row and step-size updates through [`ActionValueFunction`].

mod linear;
mod tabular;
mod tile_coding;

use std::io::Write;

pub use linear::LinearQ;
pub use tabular::TabularQ;
pub use tile_coding::{TileCoder, TileCoderConfig};

use crate::error::Result;
use crate::mdp::ActionId;

pub trait ActionValueFunction<S: ?Sized> {
    fn num_actions(&self) -> usize;

    fn q_value(&self, state: &S, action: ActionId) -> f64;

    fn action_values(&self, state: &S) -> Vec<f64> {
        (0..self.num_actions())
            .map(|a| self.q_value(state, ActionId(a)))
            .collect()
    }

    /// `Σ_a row[a] · Q(state, a)`.
    fn expected_q(&self, state: &S, row: &[f64]) -> f64 {
        dot(row, &self.action_values(state))
    }

    /// Moves `Q(state, action)` a fraction `step_size` of the way towards
    /// `target` and returns the new value. A non-finite target leaves the
    /// function untouched and returns [`crate::Error::NonFinite`].
    fn apply_update(
        &mut self,
        state: &S,
        action: ActionId,
        step_size: f64,
        target: f64,
    ) -> Result<f64>;
}

pub(crate) fn dot(row: &[f64], values: &[f64]) -> f64 {
    row.iter().zip(values).map(|(p, q)| p * q).sum()
}

/// Writes a value snapshot as CSV with header `key_column,action,value_column`.
pub fn write_snapshot<W, I, K>(
    writer: W,
    key_column: &str,
    value_column: &str,
    rows: I,
) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (K, ActionId, f64)>,
    K: std::fmt::Display,
{
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([key_column, "action", value_column])?;
    for (key, action, value) in rows {
        out.write_record([
            key.to_string(),
            action.0.to_string(),
            crate::harness::format_f64(value),
        ])?;
    }
    out.flush()?;
    Ok(())
}
