use std::collections::BTreeMap;

use serde::Deserialize;

use super::RunRecord;

/// How a run's metric series is reduced to one number for the main table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Summary {
    /// The last recorded value (final RMS); episode column `final`.
    Final,
    /// Mean over all episodes (mean return); episode column `all`.
    MeanOverEpisodes,
}

impl Summary {
    fn label(self) -> &'static str {
        match self {
            Self::Final => "final",
            Self::MeanOverEpisodes => "all",
        }
    }

    fn reduce(self, values: &[f64]) -> f64 {
        match self {
            Self::Final => *values.last().expect("runs record at least one value"),
            Self::MeanOverEpisodes => values.iter().sum::<f64>() / values.len() as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct AggregateRow {
    pub algorithm: String,
    pub n: usize,
    pub alpha: f64,
    pub episode: String,
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
    pub runs: usize,
    pub diverged: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct SeriesRow {
    pub algorithm: String,
    pub n: usize,
    pub alpha: f64,
    pub episode: usize,
    pub mean_return: f64,
    pub stderr: f64,
    pub runs: usize,
}

/// Mean, sample standard deviation and standard error, summed in input order.
fn moments(values: &[f64]) -> (f64, f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std, std / k.sqrt())
}

/// Groups by cell, ordered by run index regardless of input order.
fn by_cell(records: &[RunRecord]) -> BTreeMap<usize, Vec<&RunRecord>> {
    let mut groups: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.cell).or_default().push(r);
    }
    for group in groups.values_mut() {
        group.sort_by_key(|r| r.run);
    }
    groups
}

/// One row per cell, in cell order.
pub fn aggregate(records: &[RunRecord], summary: Summary) -> Vec<AggregateRow> {
    by_cell(records)
        .into_values()
        .map(|group| {
            let values: Vec<f64> = group.iter().map(|r| summary.reduce(&r.values)).collect();
            let (mean, std, stderr) = moments(&values);
            let head = group[0];
            AggregateRow {
                algorithm: head.algorithm.clone(),
                n: head.n,
                alpha: head.alpha,
                episode: summary.label().to_string(),
                mean,
                std,
                stderr,
                runs: group.len(),
                diverged: group.iter().filter(|r| r.diverged).count(),
            }
        })
        .collect()
}

/// Per-episode mean and standard error for every cell, episodes numbered from 1.
pub fn aggregate_series(records: &[RunRecord]) -> Vec<SeriesRow> {
    let mut rows = Vec::new();
    for group in by_cell(records).into_values() {
        let head = group[0];
        let episodes = group.iter().map(|r| r.values.len()).min().unwrap_or(0);
        for e in 0..episodes {
            let values: Vec<f64> = group.iter().map(|r| r.values[e]).collect();
            let (mean, _, stderr) = moments(&values);
            rows.push(SeriesRow {
                algorithm: head.algorithm.clone(),
                n: head.n,
                alpha: head.alpha,
                episode: e + 1,
                mean_return: mean,
                stderr,
                runs: group.len(),
            });
        }
    }
    rows
}

/// Best row per `(algorithm, n)`: the largest mean when `maximize`, else the
/// smallest. Ties keep the smaller α.
pub fn best_per_algorithm(rows: &[AggregateRow], maximize: bool) -> Vec<AggregateRow> {
    let mut best: BTreeMap<(String, usize), AggregateRow> = BTreeMap::new();
    for row in rows {
        let key = (row.algorithm.clone(), row.n);
        let better = match best.get(&key) {
            None => true,
            Some(b) if maximize => row.mean > b.mean,
            Some(b) => row.mean < b.mean,
        };
        if better {
            best.insert(key, row.clone());
        }
    }
    best.into_values().collect()
}
