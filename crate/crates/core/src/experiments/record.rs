//! One trial: sample, hull both bodies, integrate.

use serde::{Deserialize, Serialize};

use super::config::{ApexPolicy, Cell, ExperimentConfig};
use super::ExperimentError;
use crate::distributions::{sample_matrix, DistributionSpec, SampleMatrix};
use crate::hull::{convex_hull_with, inradius, symmetric_hull_with, HullError, Polytope};
use crate::isotropic::isotropic_from_summary;
use crate::moments::{
    fallback_apex, max_facet_mean_square, resolve_apex, summarize, volume_by_divergence, MomentError, MomentSummary,
};
use crate::rng::{derive_seed, mix64};

/// Everything measured on one sample. Body-specific fields are `None` when
/// that body is degenerate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub distribution: DistributionSpec,
    pub trial_index: usize,
    pub derived_seed: u64,
    pub degenerate_k: bool,
    pub degenerate_t: bool,
    pub facet_count_k: Option<usize>,
    pub facet_count_t: Option<usize>,
    pub vol_k_nthroot: Option<f64>,
    pub vol_t_nthroot: Option<f64>,
    /// Mean square distance to `Z` over `K`.
    pub msq_k: Option<f64>,
    /// Mean square norm over `T`.
    pub msq_t: Option<f64>,
    pub l_k: Option<f64>,
    pub l_t: Option<f64>,
    pub inradius_t: Option<f64>,
    /// Largest facet mean square distance to `Z` over the facets of `K`.
    pub max_facet_msq: Option<f64>,
    /// `None` when the trial was not selected for the consistency spot check.
    pub consistency_ok: Option<bool>,
    /// Sampled points `G_0..G_N`, one per row, when retained.
    #[serde(skip)]
    pub points: Option<SampleMatrix>,
    /// Seconds spent; excluded from the CSV so output is reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

impl TrialRecord {
    pub fn cell(&self) -> Cell {
        Cell { n: self.n, big_n: self.big_n }
    }

    pub fn degenerate(&self) -> bool {
        self.degenerate_k || self.degenerate_t
    }
}

struct BodyStats {
    facets: usize,
    summary: MomentSummary,
    l: f64,
}

/// `Ok(None)` marks a degenerate body.
fn classify<T>(r: Result<T, HullError>) -> Result<Option<T>, HullError> {
    match r {
        Ok(p) => Ok(Some(p)),
        Err(HullError::DegenerateInput(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn moment_degenerate<T>(r: Result<T, MomentError>) -> Result<Option<T>, MomentError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(MomentError::NumericallySingular { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn body_stats(poly: &Polytope, apex: &[f64]) -> Result<Option<BodyStats>, MomentError> {
    let summary = summarize(poly, apex)?;
    Ok(moment_degenerate(isotropic_from_summary(&summary))?.map(|iso| BodyStats {
        facets: poly.facets.len(),
        summary,
        l: iso.l_constant,
    }))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Apex independence, trace identity, covariance shift and the divergence
/// volume formula.
fn consistency_check(k: &Polytope, k_stats: &MomentSummary, t: &Polytope, t_stats: &MomentSummary) -> bool {
    let other = match summarize(k, &k_stats.barycenter) {
        Ok(s) => s,
        Err(_) => return false,
    };
    let n = k.dim;
    let scale = k_stats.covariance.norm();
    let apex_free = close(other.volume, k_stats.volume, 1e-9)
        && (&other.covariance - &k_stats.covariance).norm() <= 1e-9 * scale
        && k_stats.barycenter.iter().zip(&other.barycenter).all(|(a, b)| (a - b).abs() <= 1e-9 * k.scale());
    let identities = [k_stats, t_stats].iter().all(|s| {
        let off: Vec<f64> = s.barycenter.iter().zip(&s.apex).map(|(b, a)| b - a).collect();
        let shifted = nalgebra::DMatrix::from_fn(n, n, |i, j| s.moment_matrix[(i, j)] - off[i] * off[j]);
        close(s.moment_matrix.trace(), s.second_moment_scalar, 1e-10)
            && (&shifted - &s.covariance).norm() <= 1e-10 * s.moment_matrix.norm()
    });
    let divergence = volume_by_divergence(t).map(|v| close(v, t_stats.volume, 1e-10)).unwrap_or(false);
    apex_free && identities && divergence
}

pub(crate) fn selected_for_check(seed: u64, rate: f64) -> bool {
    rate > 0.0 && (mix64(seed ^ 0xC0FF_EE00) as f64) < rate * (u64::MAX as f64)
}

pub fn trial_seed(master: u64, cell: Cell, trial_index: usize) -> u64 {
    derive_seed(master, &[cell.n as u64, cell.big_n as u64, trial_index as u64])
}

/// Samples `G_0..G_N`, builds `K = conv{G_i}` and `T = conv{±G_1..±G_N}` and
/// records their statistics. Deterministic in `(master_seed, n, N, trial_index)`.
pub fn run_trial(cfg: &ExperimentConfig, n: usize, big_n: usize, trial_index: usize) -> Result<TrialRecord, ExperimentError> {
    let started = std::time::Instant::now();
    let cell = Cell { n, big_n };
    if n == 0 || big_n < n {
        return Err(ExperimentError::Config(format!("cell n={n} N={big_n} violates N >= n >= 1")));
    }
    let seed = trial_seed(cfg.master_seed, cell, trial_index);
    let abort = |reason: String| ExperimentError::TrialAborted { n, big_n, trial_index, reason };
    let points = sample_matrix(cfg.distribution, big_n + 1, n, seed).map_err(|e| abort(e.to_string()))?;
    let opts = cfg.hull_options();
    let k = classify(convex_hull_with(&points, &opts)).map_err(|e| abort(e.to_string()))?;
    let others = points.slice_rows(1, big_n + 1).map_err(|e| abort(e.to_string()))?;
    let t = classify(symmetric_hull_with(&others, &opts)).map_err(|e| abort(e.to_string()))?;

    let z = points.row_mean();
    let nf = n as f64;
    let mut rec = TrialRecord {
        n,
        big_n,
        distribution: cfg.distribution,
        trial_index,
        derived_seed: seed,
        degenerate_k: true,
        degenerate_t: true,
        facet_count_k: None,
        facet_count_t: None,
        vol_k_nthroot: None,
        vol_t_nthroot: None,
        msq_k: None,
        msq_t: None,
        l_k: None,
        l_t: None,
        inradius_t: None,
        max_facet_msq: None,
        consistency_ok: None,
        points: None,
        wall_time: 0.0,
    };

    let mut k_summary = None;
    if let Some(k) = &k {
        let apex = match cfg.apex {
            ApexPolicy::VertexAverage => resolve_apex(k, &z),
            ApexPolicy::Barycenter => fallback_apex(k),
        }
        .map_err(|e| abort(e.to_string()))?;
        if let Some(s) = body_stats(k, &apex).map_err(|e| abort(e.to_string()))? {
            rec.degenerate_k = false;
            rec.facet_count_k = Some(s.facets);
            rec.vol_k_nthroot = Some(s.summary.volume.powf(1.0 / nf));
            rec.msq_k = Some(s.summary.second_moment_about(&z));
            rec.l_k = Some(s.l);
            rec.max_facet_msq = Some(max_facet_mean_square(k, &z).map_err(|e| abort(e.to_string()))?);
            k_summary = Some(s.summary);
        }
    }
    let mut t_summary = None;
    if let Some(t) = &t {
        let origin = vec![0.0; n];
        let stats = match body_stats(t, &origin) {
            // origin on the boundary: T is flat
            Err(MomentError::ApexOnBoundary { .. }) => Ok(None),
            r => r,
        }
        .map_err(|e| abort(e.to_string()))?;
        if let Some(s) = stats {
            rec.degenerate_t = false;
            rec.facet_count_t = Some(s.facets);
            rec.vol_t_nthroot = Some(s.summary.volume.powf(1.0 / nf));
            rec.msq_t = Some(s.summary.second_moment_scalar);
            rec.l_t = Some(s.l);
            rec.inradius_t = Some(inradius(t, &origin).map_err(|e| abort(e.to_string()))?);
            t_summary = Some(s.summary);
        }
    }
    if let (Some(k), Some(ks), Some(t), Some(ts)) = (&k, &k_summary, &t, &t_summary) {
        if selected_for_check(seed, cfg.consistency_rate) {
            rec.consistency_ok = Some(consistency_check(k, ks, t, ts));
        }
    }
    if cfg.retain_points {
        rec.points = Some(points);
    }
    rec.wall_time = started.elapsed().as_secs_f64();
    Ok(rec)
}
