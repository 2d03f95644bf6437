//! Per-cell aggregation of trial records.

use serde::{Deserialize, Serialize};

use super::config::{Cell, ExperimentConfig, Thresholds};
use super::record::TrialRecord;
use crate::distributions::DistributionSpec;

/// Linear-interpolation quantile of sorted data (`p` in `[0, 1]`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub count: usize,
    pub min: f64,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

impl Quantiles {
    /// `None` for an empty sample.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(Quantiles {
            count: v.len(),
            min: v[0],
            q10: quantile(&v, 0.1),
            median: quantile(&v, 0.5),
            q90: quantile(&v, 0.9),
            max: v[v.len() - 1],
        })
    }
}

/// Diagnostic ratios, each normalized by the relevant power of `log(2N/n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    /// `msq_T / log(2N/n)`
    pub r1_t: Option<Quantiles>,
    /// `msq_K / log(2N/n)`
    pub r1_k: Option<Quantiles>,
    /// `vol_T^{1/n} sqrt(n / log(2N/n))`
    pub r2: Option<Quantiles>,
    /// `inradius_T / sqrt(log(2N/n))`
    pub r3: Option<Quantiles>,
    /// `max_facet_msq / log(2N/n)`
    pub r4: Option<Quantiles>,
}

/// Fractions of non-degenerate trials on the wrong side of a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exceedances {
    pub l_k_over_cap: f64,
    pub l_t_over_cap: f64,
    /// `L_K` or `L_T` above the shared cap.
    pub l_over_cap: f64,
    pub r1_t_over_cap: f64,
    pub r1_k_over_cap: f64,
    pub r2_below_floor: f64,
    pub r3_below_floor: f64,
    pub r4_over_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub trials: usize,
    pub degenerate_k: usize,
    pub degenerate_t: usize,
    /// Trials where either body is degenerate.
    pub degenerate: usize,
    pub in_regime: bool,
    pub l_k: Option<Quantiles>,
    pub l_t: Option<Quantiles>,
    pub msq_k: Option<Quantiles>,
    pub msq_t: Option<Quantiles>,
    pub vol_k_nthroot: Option<Quantiles>,
    pub vol_t_nthroot: Option<Quantiles>,
    pub inradius_t: Option<Quantiles>,
    pub max_facet_msq: Option<Quantiles>,
    pub facet_count_k: Option<Quantiles>,
    pub facet_count_t: Option<Quantiles>,
    pub ratios: Ratios,
    pub exceedances: Exceedances,
    pub consistency_checked: usize,
    pub consistency_failures: usize,
}

impl CellSummary {
    pub fn cell(&self) -> Cell {
        Cell { n: self.n, big_n: self.big_n }
    }

    pub fn degenerate_fraction(&self) -> f64 {
        self.degenerate as f64 / self.trials as f64
    }

    pub fn degenerate_t_fraction(&self) -> f64 {
        self.degenerate_t as f64 / self.trials as f64
    }
}

fn fraction(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

fn exceed(values: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    fraction(values.iter().filter(|&&v| pred(v)).count(), values.len())
}

/// Summary of one cell's records (all from that cell).
pub fn summarize_cell(cell: Cell, records: &[TrialRecord], th: &Thresholds) -> CellSummary {
    let log = cell.log_scale();
    let nf = cell.n as f64;
    let col = |f: fn(&TrialRecord) -> Option<f64>| -> Vec<f64> { records.iter().filter_map(f).collect() };
    let l_k = col(|r| r.l_k);
    let l_t = col(|r| r.l_t);
    let msq_k = col(|r| r.msq_k);
    let msq_t = col(|r| r.msq_t);
    let vol_t = col(|r| r.vol_t_nthroot);
    let inr = col(|r| r.inradius_t);
    let facet_msq = col(|r| r.max_facet_msq);
    let r1_t: Vec<f64> = msq_t.iter().map(|v| v / log).collect();
    let r1_k: Vec<f64> = msq_k.iter().map(|v| v / log).collect();
    let r2: Vec<f64> = vol_t.iter().map(|v| v * (nf / log).sqrt()).collect();
    let r3: Vec<f64> = inr.iter().map(|v| v / log.sqrt()).collect();
    let r4: Vec<f64> = facet_msq.iter().map(|v| v / log).collect();
    let any_body = records.iter().filter(|r| r.l_k.is_some() || r.l_t.is_some()).count();
    let l_hits = records
        .iter()
        .filter(|r| r.l_k.is_some_and(|v| v > th.l_cap) || r.l_t.is_some_and(|v| v > th.l_cap))
        .count();
    let q = |v: &[f64]| Quantiles::from_values(v.iter().copied());
    let checked: Vec<bool> = records.iter().filter_map(|r| r.consistency_ok).collect();
    CellSummary {
        n: cell.n,
        big_n: cell.big_n,
        trials: records.len(),
        degenerate_k: records.iter().filter(|r| r.degenerate_k).count(),
        degenerate_t: records.iter().filter(|r| r.degenerate_t).count(),
        degenerate: records.iter().filter(|r| r.degenerate()).count(),
        in_regime: cell.in_regime(),
        l_k: q(&l_k),
        l_t: q(&l_t),
        msq_k: q(&msq_k),
        msq_t: q(&msq_t),
        vol_k_nthroot: q(&col(|r| r.vol_k_nthroot)),
        vol_t_nthroot: q(&vol_t),
        inradius_t: q(&inr),
        max_facet_msq: q(&facet_msq),
        facet_count_k: Quantiles::from_values(records.iter().filter_map(|r| r.facet_count_k.map(|c| c as f64))),
        facet_count_t: Quantiles::from_values(records.iter().filter_map(|r| r.facet_count_t.map(|c| c as f64))),
        ratios: Ratios { r1_t: q(&r1_t), r1_k: q(&r1_k), r2: q(&r2), r3: q(&r3), r4: q(&r4) },
        exceedances: Exceedances {
            l_k_over_cap: exceed(&l_k, |v| v > th.l_k_cap),
            l_t_over_cap: exceed(&l_t, |v| v > th.l_t_cap),
            l_over_cap: fraction(l_hits, any_body),
            r1_t_over_cap: exceed(&r1_t, |v| v > th.msq_t_ratio_cap),
            r1_k_over_cap: exceed(&r1_k, |v| v > th.msq_k_ratio_cap),
            r2_below_floor: exceed(&r2, |v| v < th.vol_t_ratio_floor),
            r3_below_floor: exceed(&r3, |v| v < th.inradius_ratio_floor),
            r4_over_cap: exceed(&r4, |v| v > th.max_facet_msq_ratio_cap),
        },
        consistency_checked: checked.len(),
        consistency_failures: checked.iter().filter(|ok| !**ok).count(),
    }
}

/// Exceedance and degeneracy rates pooled over all cells of one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionRates {
    pub n: usize,
    pub trials: usize,
    pub l_over_cap: f64,
    pub degenerate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub distribution: DistributionSpec,
    pub master_seed: u64,
    pub trials_per_cell: usize,
    pub thresholds_version: u32,
    pub cells: Vec<CellSummary>,
    pub by_dimension: Vec<DimensionRates>,
    /// Weak form of an exponentially small failure rate: pooled exceedance
    /// fractions do not increase with `n`.
    pub exceedance_nonincreasing: bool,
    pub consistency_failures: usize,
}

impl SummaryStats {
    pub fn cell(&self, n: usize, big_n: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.n == n && c.big_n == big_n)
    }
}

/// Records must be sorted by `(n, N, trial_index)`.
pub fn summarize_records(cfg: &ExperimentConfig, records: &[TrialRecord]) -> SummaryStats {
    let mut cells = Vec::new();
    for group in records.chunk_by(|a, b| a.cell() == b.cell()) {
        cells.push(summarize_cell(group[0].cell(), group, &cfg.thresholds));
    }
    let mut by_dimension: Vec<DimensionRates> = Vec::new();
    for group in cells.chunk_by(|a: &CellSummary, b: &CellSummary| a.n == b.n) {
        let trials: usize = group.iter().map(|c| c.trials).sum();
        let pooled = |f: fn(&CellSummary) -> f64| group.iter().map(|c| f(c) * c.trials as f64).sum::<f64>() / trials as f64;
        by_dimension.push(DimensionRates {
            n: group[0].n,
            trials,
            l_over_cap: pooled(|c| c.exceedances.l_over_cap),
            degenerate: pooled(|c| c.degenerate_fraction()),
        });
    }
    let exceedance_nonincreasing = by_dimension.windows(2).all(|w| w[1].l_over_cap <= w[0].l_over_cap);
    SummaryStats {
        distribution: cfg.distribution,
        master_seed: cfg.master_seed,
        trials_per_cell: cfg.trials,
        thresholds_version: cfg.thresholds.version,
        consistency_failures: cells.iter().map(|c| c.consistency_failures).sum(),
        cells,
        by_dimension,
        exceedance_nonincreasing,
    }
}
