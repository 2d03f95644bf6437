//! Experiment configuration and frozen thresholds.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ExperimentError;
use crate::distributions::DistributionSpec;
use crate::hull::{HullOptions, DEFAULT_FACET_BUDGET};

/// Rule giving the point count `N` as a function of the dimension `n`:
/// `a*n + b` or `n^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointRule {
    Linear { mul: usize, add: usize },
    Square,
}

impl PointRule {
    pub fn fixed(count: usize) -> Self {
        PointRule::Linear { mul: 0, add: count }
    }

    pub fn resolve(self, n: usize) -> usize {
        match self {
            PointRule::Linear { mul, add } => mul * n + add,
            PointRule::Square => n * n,
        }
    }
}

impl fmt::Display for PointRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PointRule::Square => f.write_str("n^2"),
            PointRule::Linear { mul: 0, add } => write!(f, "{add}"),
            PointRule::Linear { mul, add } => {
                if mul != 1 {
                    write!(f, "{mul}")?;
                }
                f.write_str("n")?;
                if add > 0 {
                    write!(f, "+{add}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for PointRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let err = || format!("cannot parse point rule `{s}` (examples: 40, n+1, 2n, 4n, n^2)");
        if compact == "n^2" || compact == "n²" || compact == "n*n" {
            return Ok(PointRule::Square);
        }
        if let Ok(k) = compact.parse::<usize>() {
            return Ok(PointRule::fixed(k));
        }
        let (lin, add) = match compact.split_once('+') {
            Some((l, a)) => (l, a.parse::<usize>().map_err(|_| err())?),
            None => (compact.as_str(), 0),
        };
        let coef = lin.strip_suffix('n').ok_or_else(err)?;
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let mul = if coef.is_empty() { 1 } else { coef.parse::<usize>().map_err(|_| err())? };
        Ok(PointRule::Linear { mul, add })
    }
}

impl Serialize for PointRule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PointRule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Rule(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(k) => Ok(PointRule::fixed(k)),
            Raw::Rule(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Where the cone decomposition of `K` is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApexPolicy {
    /// The average `Z` of the sampled points.
    #[default]
    VertexAverage,
    /// The exact barycenter of `K`.
    Barycenter,
}

/// Pilot-calibrated constants. Caps are 1.5 times the pilot's 99th
/// percentile, floors the pilot's 1st percentile divided by 1.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub version: u32,
    pub pilot: PilotInfo,
    pub l_cap: f64,
    pub l_k_cap: f64,
    pub l_t_cap: f64,
    pub msq_k_ratio_cap: f64,
    pub msq_t_ratio_cap: f64,
    pub max_facet_msq_ratio_cap: f64,
    pub vol_t_ratio_floor: f64,
    pub inradius_ratio_floor: f64,
    pub lemma_subset_mean_cap: f64,
    pub lemma_full_mean_cap: f64,
    pub lemma_quadratic_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotInfo {
    pub distribution: DistributionSpec,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub margin: f64,
}

const FROZEN_V1: &str = include_str!("../../config/thresholds_v1.json");

impl Thresholds {
    /// The versioned thresholds shipped with the crate.
    pub fn frozen() -> Self {
        serde_json::from_str(FROZEN_V1).expect("bundled thresholds are valid JSON")
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self::frozen()
    }
}

fn default_trials() -> usize {
    100
}

fn default_facet_budget() -> usize {
    DEFAULT_FACET_BUDGET
}

fn default_consistency_rate() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dims: Vec<usize>,
    pub point_counts: Vec<PointRule>,
    pub distribution: DistributionSpec,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_facet_budget")]
    pub facet_budget: usize,
    #[serde(default)]
    pub apex: ApexPolicy,
    /// Keep the sampled points in each record (needed by the lemma report).
    #[serde(default)]
    pub retain_points: bool,
    /// Fraction of trials that rerun the moment consistency checks.
    #[serde(default = "default_consistency_rate")]
    pub consistency_rate: f64,
    /// Worker threads; `None` uses the global pool.
    #[serde(default)]
    pub threads: Option<usize>,
}

/// One `(n, N)` cell of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
}

impl Cell {
    /// `log(2N/n)`, the common scale of the diagnostic ratios.
    pub fn log_scale(self) -> f64 {
        (2.0 * self.big_n as f64 / self.n as f64).ln()
    }

    /// `2n <= N <= 2^n`.
    pub fn in_regime(self) -> bool {
        let cap = if self.n >= 63 { usize::MAX } else { 1usize << self.n };
        2 * self.n <= self.big_n && self.big_n <= cap
    }
}

impl ExperimentConfig {
    pub fn new(dims: Vec<usize>, point_counts: Vec<PointRule>, distribution: DistributionSpec) -> Self {
        ExperimentConfig {
            dims,
            point_counts,
            distribution,
            trials: default_trials(),
            master_seed: 0,
            thresholds: Thresholds::frozen(),
            facet_budget: DEFAULT_FACET_BUDGET,
            apex: ApexPolicy::default(),
            retain_points: false,
            consistency_rate: default_consistency_rate(),
            threads: None,
        }
    }

    /// JSON, or TOML when the file name ends in `.toml`.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| ExperimentError::Config(e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| ExperimentError::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Distinct cells in `(n, N)` order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells: Vec<Cell> = self
            .dims
            .iter()
            .flat_map(|&n| self.point_counts.iter().map(move |r| Cell { n, big_n: r.resolve(n) }))
            .collect();
        cells.sort();
        cells.dedup();
        cells
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.dims.is_empty() || self.point_counts.is_empty() {
            return bad("dims and point_counts must be non-empty".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.consistency_rate) {
            return bad(format!("consistency_rate {} outside [0, 1]", self.consistency_rate));
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        for c in self.cells() {
            if c.n == 0 {
                return bad("dimension 0 is not allowed".into());
            }
            if c.big_n < c.n {
                return bad(format!("cell n={} N={} violates N >= n", c.n, c.big_n));
            }
        }
        Ok(())
    }

    pub fn hull_options(&self) -> HullOptions {
        let base = if self.distribution.is_continuous() { HullOptions::default() } else { HullOptions::triangulating() };
        HullOptions { facet_budget: self.facet_budget, ..base }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_rules() {
        for (s, n, want) in [("n+1", 4, 5), ("2n", 4, 8), ("4n", 3, 12), ("n^2", 6, 36), ("40", 9, 40), ("3n+2", 2, 8)] {
            let r: PointRule = s.parse().unwrap();
            assert_eq!(r.resolve(n), want, "{s}");
            assert_eq!(r.to_string().parse::<PointRule>().unwrap(), r);
        }
        assert!("2m".parse::<PointRule>().is_err());
        assert!("n+".parse::<PointRule>().is_err());
    }

    #[test]
    fn regime_flag() {
        assert!(Cell { n: 4, big_n: 16 }.in_regime());
        assert!(!Cell { n: 4, big_n: 17 }.in_regime());
        assert!(!Cell { n: 4, big_n: 5 }.in_regime());
    }

    #[test]
    fn rejects_small_point_counts() {
        let cfg = ExperimentConfig::new(vec![5], vec![PointRule::fixed(3)], DistributionSpec::StandardGaussian);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parses_json_and_toml() {
        let json = r#"{"dims":[2,3],"point_counts":["n+1",10],"distribution":"rademacher","trials":5}"#;
        let a: ExperimentConfig = serde_json::from_str(json).unwrap();
        let toml_text = "dims = [2, 3]\npoint_counts = [\"n+1\", 10]\ndistribution = \"rademacher\"\ntrials = 5\n";
        let b: ExperimentConfig = toml::from_str(toml_text).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells().len(), 4);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"dims":[2],"point_counts":[3],"distribution":"gaussian","bogus":1}"#).is_err());
    }
}
