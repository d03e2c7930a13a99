use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{format_f64, AggregateRow, SeriesRow};
use crate::error::Result;

pub const CSV_HEADER: [&str; 9] = [
    "algorithm",
    "n",
    "alpha",
    "episode",
    "mean",
    "std",
    "stderr",
    "runs",
    "diverged",
];

pub const SERIES_HEADER: [&str; 7] = [
    "algorithm",
    "n",
    "alpha",
    "episode",
    "mean_return",
    "stderr",
    "runs",
];

pub fn write_csv<W: Write>(writer: W, rows: &[AggregateRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        out.write_record([
            r.algorithm.clone(),
            r.n.to_string(),
            format_f64(r.alpha),
            r.episode.clone(),
            format_f64(r.mean),
            format_f64(r.std),
            format_f64(r.stderr),
            r.runs.to_string(),
            r.diverged.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_series_csv<W: Write>(writer: W, rows: &[SeriesRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(SERIES_HEADER)?;
    for r in rows {
        out.write_record([
            r.algorithm.clone(),
            r.n.to_string(),
            format_f64(r.alpha),
            r.episode.to_string(),
            format_f64(r.mean_return),
            format_f64(r.stderr),
            r.runs.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[AggregateRow], path: impl AsRef<Path>) -> Result<()> {
    write_csv(File::create(path)?, rows)
}

pub fn emit_series_csv(rows: &[SeriesRow], path: impl AsRef<Path>) -> Result<()> {
    write_series_csv(File::create(path)?, rows)
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<AggregateRow>> {
    let mut input = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for row in input.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}
