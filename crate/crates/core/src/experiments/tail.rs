//! Empirical tails of sample means against the shape `2 exp(-c m min(t/L, t^2/L^2))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::rng::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    /// Fraction of trials with `|mean| > t`.
    pub empirical: f64,
    pub stderr: f64,
    /// `2 exp(-c m min(t/L, t^2/L^2))` at the calibrated `c`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTable {
    pub distribution: DistributionSpec,
    pub m: usize,
    pub scale: f64,
    pub trials: usize,
    pub seed: u64,
    /// Largest `c` for which the bound dominates the empirical tail at every
    /// grid point; `None` when no grid point constrains it (all tails zero).
    pub calibrated_c: Option<f64>,
    pub rows: Vec<TailRow>,
}

/// `m min(t/L, t^2/L^2)`.
pub fn bernstein_exponent(m: usize, scale: f64, t: f64) -> f64 {
    let u = t / scale;
    m as f64 * u.min(u * u)
}

/// Means of `m` draws, one per trial, each trial on its own stream.
pub fn sample_means(spec: DistributionSpec, m: usize, trials: usize, seed: u64) -> Vec<f64> {
    let key = StreamKey::new(seed);
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.child(i as u64).rng();
            (0..m).map(|_| spec.draw(&mut rng)).sum::<f64>() / m as f64
        })
        .collect()
}

pub fn bernstein_tail_check(
    spec: DistributionSpec,
    m: usize,
    scale: f64,
    t_grid: &[f64],
    trials: usize,
    seed: u64,
) -> TailTable {
    let mut abs: Vec<f64> = sample_means(spec, m.max(1), trials, seed).into_iter().map(f64::abs).collect();
    abs.sort_by(f64::total_cmp);
    let tails: Vec<(f64, f64)> = t_grid
        .iter()
        .map(|&t| {
            let above = abs.len() - abs.partition_point(|&x| x <= t);
            let p = above as f64 / trials as f64;
            (t, p)
        })
        .collect();
    // 2 exp(-c e) >= p  <=>  c <= ln(2/p) / e
    let calibrated_c = tails
        .iter()
        .filter(|(t, p)| *p > 0.0 && bernstein_exponent(m, scale, *t) > 0.0)
        .map(|(t, p)| (2.0 / p).ln() / bernstein_exponent(m, scale, *t))
        .reduce(f64::min);
    let rows = tails
        .into_iter()
        .map(|(t, p)| TailRow {
            t,
            empirical: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            bound: 2.0 * (-calibrated_c.unwrap_or(0.0) * bernstein_exponent(m, scale, t)).exp(),
        })
        .collect();
    TailTable { distribution: spec, m, scale, trials, seed, calibrated_c, rows }
}
