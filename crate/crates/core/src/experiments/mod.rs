//! Seeded batches over grids of `(n, N)`: records, summaries and the
//! supporting tail and point statistics.

pub mod config;
pub mod io;
pub mod lemma;
pub mod record;
pub mod summary;
pub mod tail;

use rayon::prelude::*;
use thiserror::Error;

pub use config::{ApexPolicy, Cell, ExperimentConfig, PointRule, Thresholds};
pub use lemma::{lemma_ratio_report, lemma_statistics, LemmaReport};
pub use record::{run_trial, TrialRecord};
pub use summary::{CellSummary, Quantiles, SummaryStats};
pub use tail::{bernstein_tail_check, TailTable};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("trial {trial_index} of cell n={n} N={big_n} aborted: {reason}")]
    TrialAborted { n: usize, big_n: usize, trial_index: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// Sorted by `(n, N, trial_index)`.
    pub records: Vec<TrialRecord>,
    pub summary: SummaryStats,
}

fn run_all(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>, ExperimentError> {
    let jobs: Vec<(Cell, usize)> =
        cfg.cells().into_iter().flat_map(|c| (0..cfg.trials).map(move |i| (c, i))).collect();
    // collect() keeps job order regardless of scheduling
    jobs.into_par_iter().map(|(c, i)| run_trial(cfg, c.n, c.big_n, i)).collect()
}

/// Runs every trial of every cell. Output is independent of the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    cfg.validate()?;
    let records = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| ExperimentError::Pool(e.to_string()))?
            .install(|| run_all(cfg))?,
        None => run_all(cfg)?,
    };
    let summary = summary::summarize_records(cfg, &records);
    Ok(ExperimentOutput { records, summary })
}
