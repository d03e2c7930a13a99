//! Seeded parameter sweeps over (algorithm × n × α), aggregation and CSV I/O.

mod aggregate;
mod config;
mod csv_io;
mod sweep;

pub use aggregate::{
    aggregate, aggregate_series, best_per_algorithm, AggregateRow, SeriesRow, Summary,
};
pub use config::{
    AlgorithmSpec, ExperimentConfig, ExperimentKind, Measurement, DEFAULT_ALPHA_GRID,
};
pub use csv_io::{
    emit_csv, emit_series_csv, read_csv, write_csv, write_series_csv, CSV_HEADER, SERIES_HEADER,
};
pub use sweep::{cells, gridworld_policies, run_cell, run_sweep, Cell, RunRecord, Setup};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}
