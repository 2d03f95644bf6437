//! Point statistics behind the facet estimates: norms of subset means and a
//! quadratic form of `n` points, scaled by `log(2N/n)`.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{Cell, Thresholds};
use super::record::TrialRecord;
use super::summary::Quantiles;
use crate::distributions::SampleMatrix;
use crate::rng::StreamKey;

/// Random `n`-subsets examined per trial.
pub const SUBSETS_PER_TRIAL: usize = 100;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LemmaError {
    #[error("record n={n} N={big_n} trial {trial_index} has no retained points")]
    MissingSamples { n: usize, big_n: usize, trial_index: usize },
}

/// Unscaled statistics of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaStatistics {
    /// Max over subsets of `|mean of the subset|`.
    pub subset_mean: f64,
    /// `|mean of all N+1 points|`.
    pub full_mean: f64,
    /// Max over subsets of `n^{-2} Σ_i [(Σ_j g_ij)^2 + Σ_j g_ij^2]`.
    pub quadratic: f64,
}

fn subset_stats(points: &SampleMatrix, idx: &[usize]) -> (f64, f64) {
    let n = points.cols();
    let k = idx.len() as f64;
    let mut mean = vec![0.0; n];
    let mut quad = 0.0;
    for &i in idx {
        let g = points.row(i);
        let s: f64 = g.iter().sum();
        let sq: f64 = g.iter().map(|x| x * x).sum();
        quad += s * s + sq;
        mean.iter_mut().zip(g).for_each(|(m, x)| *m += x / k);
    }
    let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm, quad / (n * n) as f64)
}

/// Statistics of `G_0..G_N` (rows of `points`); subsets drawn from `seed`.
pub fn lemma_statistics(points: &SampleMatrix, subsets: usize, seed: u64) -> LemmaStatistics {
    let n = points.cols();
    let rows = points.rows();
    let mut rng = StreamKey::new(seed).child(0x1E44A).rng();
    let mut subset_mean = 0.0f64;
    let mut quadratic = 0.0f64;
    for _ in 0..subsets {
        let idx = sample(&mut rng, rows, n.min(rows)).into_vec();
        let (m, q) = subset_stats(points, &idx);
        subset_mean = subset_mean.max(m);
        quadratic = quadratic.max(q);
    }
    let full_mean = crate::linalg::norm(&points.row_mean());
    LemmaStatistics { subset_mean, full_mean, quadratic }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCellReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub trials: usize,
    /// `subset_mean / sqrt(log(2N/n))`
    pub subset_mean_ratio: Quantiles,
    /// `full_mean / sqrt(log(2N/n))`
    pub full_mean_ratio: Quantiles,
    /// `quadratic / log(2N/n)`
    pub quadratic_ratio: Quantiles,
    pub subset_mean_exceed: f64,
    pub full_mean_exceed: f64,
    pub quadratic_exceed: f64,
}

/// Whether the quadratic-ratio medians of one dimension do not increase with `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaTrend {
    pub n: usize,
    pub point_counts: Vec<usize>,
    pub medians: Vec<f64>,
    pub nonincreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub cells: Vec<LemmaCellReport>,
    /// Reported only; boundedness, not monotonicity, is what the estimate gives.
    pub trends: Vec<LemmaTrend>,
}

/// Records must carry their points and be sorted by `(n, N, trial_index)`.
pub fn lemma_ratio_report(records: &[TrialRecord], thresholds: &Thresholds) -> Result<LemmaReport, LemmaError> {
    let mut cells = Vec::new();
    for group in records.chunk_by(|a, b| a.cell() == b.cell()) {
        let cell: Cell = group[0].cell();
        let log = cell.log_scale();
        let mut stats = Vec::with_capacity(group.len());
        for r in group {
            let pts = r.points.as_ref().ok_or(LemmaError::MissingSamples {
                n: r.n,
                big_n: r.big_n,
                trial_index: r.trial_index,
            })?;
            stats.push(lemma_statistics(pts, SUBSETS_PER_TRIAL, r.derived_seed));
        }
        let a: Vec<f64> = stats.iter().map(|s| s.subset_mean / log.sqrt()).collect();
        let b: Vec<f64> = stats.iter().map(|s| s.full_mean / log.sqrt()).collect();
        let c: Vec<f64> = stats.iter().map(|s| s.quadratic / log).collect();
        let frac = |v: &[f64], cap: f64| v.iter().filter(|&&x| x > cap).count() as f64 / v.len() as f64;
        cells.push(LemmaCellReport {
            n: cell.n,
            big_n: cell.big_n,
            trials: group.len(),
            subset_mean_exceed: frac(&a, thresholds.lemma_subset_mean_cap),
            full_mean_exceed: frac(&b, thresholds.lemma_full_mean_cap),
            quadratic_exceed: frac(&c, thresholds.lemma_quadratic_cap),
            subset_mean_ratio: Quantiles::from_values(a).expect("non-empty cell"),
            full_mean_ratio: Quantiles::from_values(b).expect("non-empty cell"),
            quadratic_ratio: Quantiles::from_values(c).expect("non-empty cell"),
        });
    }
    let trends = cells
        .chunk_by(|a, b| a.n == b.n)
        .map(|g| {
            let medians: Vec<f64> = g.iter().map(|c| c.quadratic_ratio.median).collect();
            LemmaTrend {
                n: g[0].n,
                point_counts: g.iter().map(|c| c.big_n).collect(),
                nonincreasing: medians.windows(2).all(|w| w[1] <= w[0]),
                medians,
            }
        })
        .collect();
    Ok(LemmaReport { cells, trends })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_statistics() {
        // two points in the plane, subsets of size 2 are the whole set
        let pts = SampleMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, -1.0]]).unwrap();
        let s = lemma_statistics(&pts, 3, 0);
        assert!((s.full_mean - (4.0f64 + 0.25).sqrt()).abs() < 1e-15);
        assert_eq!(s.subset_mean, s.full_mean);
        // [(3)^2 + 5 + (2)^2 + 10] / 4
        assert!((s.quadratic - 7.0).abs() < 1e-15);
    }
}
