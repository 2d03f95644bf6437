//! Regenerates the frozen thresholds from a pilot run.
//!
//! cargo run --release -p isoconst --example pilot > crates/core/config/thresholds_v1.json

use isoconst::experiments::summary::quantile;
use isoconst::experiments::{lemma_statistics, run_experiment, ExperimentConfig, PointRule, Thresholds};
use isoconst::experiments::config::PilotInfo;
use isoconst::experiments::lemma::SUBSETS_PER_TRIAL;
use isoconst::DistributionSpec;

const N: usize = 6;
const BIG_N: usize = 24;
const TRIALS: usize = 1000;
const SEED: u64 = 20_240_601;
const MARGIN: f64 = 1.5;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn cap(v: Vec<f64>) -> f64 {
    MARGIN * quantile(&sorted(v), 0.99)
}

fn floor(v: Vec<f64>) -> f64 {
    quantile(&sorted(v), 0.01) / MARGIN
}

fn main() {
    let mut cfg = ExperimentConfig::new(vec![N], vec![PointRule::fixed(BIG_N)], DistributionSpec::StandardGaussian);
    cfg.trials = TRIALS;
    cfg.master_seed = SEED;
    cfg.retain_points = true;
    cfg.consistency_rate = 0.0;
    let out = run_experiment(&cfg).expect("pilot run");
    let recs = &out.records;
    let log = (2.0 * BIG_N as f64 / N as f64).ln();
    let col = |f: fn(&isoconst::TrialRecord) -> Option<f64>| recs.iter().filter_map(f).collect::<Vec<f64>>();
    let lemma: Vec<_> = recs
        .iter()
        .map(|r| lemma_statistics(r.points.as_ref().unwrap(), SUBSETS_PER_TRIAL, r.derived_seed))
        .collect();
    let l_k_cap = cap(col(|r| r.l_k));
    let l_t_cap = cap(col(|r| r.l_t));
    let th = Thresholds {
        version: 1,
        pilot: PilotInfo {
            distribution: DistributionSpec::StandardGaussian,
            n: N,
            big_n: BIG_N,
            trials: TRIALS,
            master_seed: SEED,
            margin: MARGIN,
        },
        l_cap: l_k_cap.max(l_t_cap),
        l_k_cap,
        l_t_cap,
        msq_k_ratio_cap: cap(col(|r| r.msq_k).iter().map(|v| v / log).collect()),
        msq_t_ratio_cap: cap(col(|r| r.msq_t).iter().map(|v| v / log).collect()),
        max_facet_msq_ratio_cap: cap(col(|r| r.max_facet_msq).iter().map(|v| v / log).collect()),
        vol_t_ratio_floor: floor(col(|r| r.vol_t_nthroot).iter().map(|v| v * (N as f64 / log).sqrt()).collect()),
        inradius_ratio_floor: floor(col(|r| r.inradius_t).iter().map(|v| v / log.sqrt()).collect()),
        lemma_subset_mean_cap: cap(lemma.iter().map(|s| s.subset_mean / log.sqrt()).collect()),
        lemma_full_mean_cap: cap(lemma.iter().map(|s| s.full_mean / log.sqrt()).collect()),
        lemma_quadratic_cap: cap(lemma.iter().map(|s| s.quadratic / log).collect()),
    };
    println!("{}", serde_json::to_string_pretty(&th).unwrap());
}
