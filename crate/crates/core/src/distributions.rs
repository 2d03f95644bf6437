//! Coordinate laws for the random point models and empirical checks of their
//! moment and sub-gaussian tail conditions.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{CounterRng, StreamKey};

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Law of a single coordinate. Every kind has mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistributionSpec {
    #[serde(rename = "gaussian")]
    StandardGaussian,
    #[serde(rename = "rademacher")]
    Rademacher,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    #[serde(rename = "uniform")]
    UniformSymmetric,
}

impl DistributionSpec {
    pub const ALL: [DistributionSpec; 3] = [
        DistributionSpec::StandardGaussian,
        DistributionSpec::Rademacher,
        DistributionSpec::UniformSymmetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistributionSpec::StandardGaussian => "gaussian",
            DistributionSpec::Rademacher => "rademacher",
            DistributionSpec::UniformSymmetric => "uniform",
        }
    }

    /// Whether the law has a density. Discrete laws produce coplanar and
    /// repeated points with positive probability.
    pub fn is_continuous(self) -> bool {
        !matches!(self, DistributionSpec::Rademacher)
    }

    /// Analytic `E X^4`.
    pub fn fourth_moment(self) -> f64 {
        match self {
            DistributionSpec::StandardGaussian => 3.0,
            DistributionSpec::Rademacher => 1.0,
            DistributionSpec::UniformSymmetric => 9.0 / 5.0,
        }
    }

    #[inline]
    pub fn draw(self, rng: &mut CounterRng) -> f64 {
        match self {
            DistributionSpec::StandardGaussian => rng.sample(StandardNormal),
            DistributionSpec::Rademacher => {
                if rng.next_u64() >> 63 == 0 {
                    -1.0
                } else {
                    1.0
                }
            }
            DistributionSpec::UniformSymmetric => (2.0 * rng.open01() - 1.0) * 3f64.sqrt(),
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistributionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(DistributionSpec::StandardGaussian),
            "rademacher" => Ok(DistributionSpec::Rademacher),
            "uniform" => Ok(DistributionSpec::UniformSymmetric),
            other => Err(format!("unknown distribution `{other}` (expected gaussian, rademacher or uniform)")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("matrix shape {rows}x{cols} overflows the address space")]
    SizeOverflow { rows: usize, cols: usize },
    #[error("matrix shape {rows}x{cols} is empty")]
    EmptyShape { rows: usize, cols: usize },
    #[error("data length {len} does not match shape {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

/// Row-major matrix of point coordinates, one point per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    seed: u64,
}

impl SampleMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>, seed: u64) -> Result<Self, SampleError> {
        if rows == 0 || cols == 0 {
            return Err(SampleError::EmptyShape { rows, cols });
        }
        let len = rows.checked_mul(cols).ok_or(SampleError::SizeOverflow { rows, cols })?;
        if data.len() != len {
            return Err(SampleError::ShapeMismatch { rows, cols, len: data.len() });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(SampleError::NonFinite { row: pos / cols, col: pos % cols });
        }
        Ok(SampleMatrix { rows, cols, data, seed })
    }

    /// Builds a matrix from explicit points; the seed is recorded as 0.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, SampleError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(SampleError::ShapeMismatch { rows: rows.len(), cols, len: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data, 0)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    /// Rows `start..end` as a new matrix (same seed).
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<SampleMatrix, SampleError> {
        let end = end.min(self.rows);
        let start = start.min(end);
        Self::from_vec(end - start, self.cols, self.data[start * self.cols..end * self.cols].to_vec(), self.seed)
    }

    /// The points together with their negatives: `p_0, -p_0, p_1, -p_1, ...`.
    pub fn with_negatives(&self) -> SampleMatrix {
        let mut data = Vec::with_capacity(2 * self.data.len());
        for r in self.iter_rows() {
            data.extend_from_slice(r);
            data.extend(r.iter().map(|x| -x));
        }
        SampleMatrix { rows: 2 * self.rows, cols: self.cols, data, seed: self.seed }
    }

    /// Coordinatewise mean of the rows.
    pub fn row_mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.cols];
        for r in self.iter_rows() {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= self.rows as f64);
        mean
    }
}

/// Value of cell `(row, col)` of the matrix generated from `seed`.
#[inline]
fn cell_value(spec: DistributionSpec, key: StreamKey, row: usize, col: usize) -> f64 {
    spec.draw(&mut key.child(row as u64).child(col as u64).rng())
}

const PARALLEL_CELLS: usize = 1 << 16;

/// i.i.d. `rows x cols` draws from `spec`. Cell `(r, c)` reads its own stream
/// keyed by `(seed, r, c)`, so the output does not depend on thread count.
pub fn sample_matrix(spec: DistributionSpec, rows: usize, cols: usize, seed: u64) -> Result<SampleMatrix, SampleError> {
    if rows == 0 || cols == 0 {
        return Err(SampleError::EmptyShape { rows, cols });
    }
    let len = rows.checked_mul(cols).ok_or(SampleError::SizeOverflow { rows, cols })?;
    if len.checked_mul(std::mem::size_of::<f64>()).is_none_or(|b| b > isize::MAX as usize) {
        return Err(SampleError::SizeOverflow { rows, cols });
    }
    let key = StreamKey::new(seed);
    let mut data = vec![0.0; len];
    let fill = |(r, row): (usize, &mut [f64])| {
        for (c, x) in row.iter_mut().enumerate() {
            *x = cell_value(spec, key, r, c);
        }
    };
    if len >= PARALLEL_CELLS {
        data.par_chunks_mut(cols).enumerate().for_each(fill);
    } else {
        data.chunks_mut(cols).enumerate().for_each(fill);
    }
    Ok(SampleMatrix { rows, cols, data, seed })
}

/// Sample mean with its standard error and a 99% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let (mut n, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
        for x in values {
            n += 1;
            let delta = x - mean;
            mean += delta / n as f64;
            m2 += delta * (x - mean);
        }
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Estimate { value: mean, stderr: (var / n.max(1) as f64).sqrt() }
    }

    pub fn ci99(&self) -> (f64, f64) {
        (self.value - Z_99 * self.stderr, self.value + Z_99 * self.stderr)
    }

    /// Whether `target` lies in the 99% interval. A zero-width interval
    /// (constant samples) admits a 1e-12 relative slack.
    pub fn covers(&self, target: f64) -> bool {
        (self.value - target).abs() <= Z_99 * self.stderr + 1e-12 * target.abs().max(1.0)
    }

    /// Number of standard errors separating the estimate from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if (self.value - target).abs() <= 1e-12 * target.abs().max(1.0) {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - target) / self.stderr
        }
    }
}

/// Threshold on `E exp(X^2 / 10)`.
pub const EXP_MOMENT_BOUND: f64 = 10.0;
/// Smallest sample size for which the report's intervals are meaningful.
pub const MIN_CONDITION_SAMPLES: usize = 10_000;

/// Empirical check of: mean 0, second moment 1, `E exp(X^2/10) <= 10`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub distribution: DistributionSpec,
    pub samples: usize,
    pub seed: u64,
    pub mean: Estimate,
    pub second_moment: Estimate,
    /// Central sample variance (informational).
    pub variance: f64,
    pub exp_moment: Estimate,
    pub fourth_moment: Estimate,
    pub mean_ok: bool,
    pub second_moment_ok: bool,
    pub exp_moment_ok: bool,
    pub enough_samples: bool,
    pub pass: bool,
}

pub fn validate_star_conditions(spec: DistributionSpec, m: usize, seed: u64) -> ConditionReport {
    let m = m.max(1);
    let key = StreamKey::new(seed);
    let xs: Vec<f64> = (0..m).into_par_iter().map(|i| cell_value(spec, key, i, 0)).collect();

    let mean = Estimate::from_values(xs.iter().copied());
    let second_moment = Estimate::from_values(xs.iter().map(|x| x * x));
    let exp_moment = Estimate::from_values(xs.iter().map(|x| (x * x / 10.0).exp()));
    let fourth_moment = Estimate::from_values(xs.iter().map(|x| x.powi(4)));
    let variance = second_moment.value - mean.value * mean.value;

    let mean_ok = mean.covers(0.0);
    let second_moment_ok = second_moment.covers(1.0);
    // Fails only when the whole interval sits above the bound.
    let exp_moment_ok = exp_moment.ci99().0 <= EXP_MOMENT_BOUND;
    let enough_samples = m >= MIN_CONDITION_SAMPLES;
    ConditionReport {
        distribution: spec,
        samples: m,
        seed,
        mean,
        second_moment,
        variance,
        exp_moment,
        fourth_moment,
        mean_ok,
        second_moment_ok,
        exp_moment_ok,
        enough_samples,
        pass: mean_ok && second_moment_ok && exp_moment_ok && enough_samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Simpson's rule on [a, b] with `steps` (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
        let h = (b - a) / steps as f64;
        let mut s = f(a) + f(b);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn gaussian_exp_moment_closed_form_matches_quadrature() {
        let closed = (1.0f64 - 2.0 / 10.0).powf(-0.5);
        let phi = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let quad = simpson(|x| (x * x / 10.0).exp() * phi(x), -40.0, 40.0, 40_000);
        assert!((closed - quad).abs() < 1e-10, "{closed} vs {quad}");
        assert!((closed - 1.118_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn rademacher_entries_are_signs() {
        let m = sample_matrix(DistributionSpec::Rademacher, 2, 2, 11).unwrap();
        assert!(m.data().iter().all(|&x| x == 1.0 || x == -1.0));
        let big = sample_matrix(DistributionSpec::Rademacher, 1000, 3, 11).unwrap();
        assert!(big.data().contains(&1.0));
        assert!(big.data().iter().any(|&x| x == -1.0));
    }

    #[test]
    fn uniform_variance_near_one() {
        let m = sample_matrix(DistributionSpec::UniformSymmetric, 1_000_000, 1, 5).unwrap();
        let var = m.data().iter().map(|x| x * x).sum::<f64>() / 1e6;
        assert!((var - 1.0).abs() < 0.01, "{var}");
        let s3 = 3f64.sqrt();
        assert!(m.data().iter().all(|x| x.abs() <= s3));
    }

    #[test]
    fn gaussian_exp_moment_sample() {
        let m = sample_matrix(DistributionSpec::StandardGaussian, 1_000_000, 1, 6).unwrap();
        let e = m.data().iter().map(|x| (x * x / 10.0).exp()).sum::<f64>() / 1e6;
        assert!((e - 1.1180).abs() < 0.02, "{e}");
    }

    #[test]
    fn sample_matrix_is_a_pure_function() {
        for spec in DistributionSpec::ALL {
            let a = sample_matrix(spec, 300, 300, 99).unwrap();
            let b = sample_matrix(spec, 300, 300, 99).unwrap();
            assert_eq!(a, b);
            // cell (r, c) does not depend on the shape
            let small = sample_matrix(spec, 3, 4, 99).unwrap();
            let wide = sample_matrix(spec, 5, 7, 99).unwrap();
            for r in 0..3 {
                for c in 0..4 {
                    assert_eq!(small.row(r)[c].to_bits(), wide.row(r)[c].to_bits());
                }
            }
            assert_ne!(a, sample_matrix(spec, 300, 300, 100).unwrap());
        }
    }

    #[test]
    fn parallel_and_serial_fill_agree() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = pool.install(|| sample_matrix(DistributionSpec::StandardGaussian, 1 << 10, 80, 3).unwrap());
        let b = sample_matrix(DistributionSpec::StandardGaussian, 1 << 10, 80, 3).unwrap();
        assert_eq!(a, b);
        let key = StreamKey::new(3);
        assert_eq!(a.row(700)[13].to_bits(), cell_value(DistributionSpec::StandardGaussian, key, 700, 13).to_bits());
    }

    #[test]
    fn shape_errors() {
        assert_eq!(
            sample_matrix(DistributionSpec::Rademacher, 0, 3, 1),
            Err(SampleError::EmptyShape { rows: 0, cols: 3 })
        );
        assert!(matches!(
            sample_matrix(DistributionSpec::Rademacher, usize::MAX, 3, 1),
            Err(SampleError::SizeOverflow { .. })
        ));
        assert!(matches!(
            SampleMatrix::from_vec(2, 2, vec![0.0, 1.0, f64::NAN, 2.0], 0),
            Err(SampleError::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn condition_reports() {
        let g = validate_star_conditions(DistributionSpec::StandardGaussian, 1_000_000, 1);
        assert!(g.pass, "{g:?}");
        assert!((g.exp_moment.value - 1.118).abs() < 0.005);

        let r = validate_star_conditions(DistributionSpec::Rademacher, 10_000, 2);
        assert!(r.pass, "{r:?}");
        assert!((r.exp_moment.value - 0.1f64.exp()).abs() < 1e-12);
        assert_eq!(r.second_moment.stderr, 0.0);

        let u = validate_star_conditions(DistributionSpec::UniformSymmetric, 1_000_000, 3);
        assert!(u.pass, "{u:?}");
        assert!(u.mean.value.abs() < 0.005);

        let short = validate_star_conditions(DistributionSpec::StandardGaussian, 100, 3);
        assert!(!short.enough_samples && !short.pass);
    }

    #[test]
    fn fourth_moments_within_five_standard_errors() {
        for spec in DistributionSpec::ALL {
            let rep = validate_star_conditions(spec, 200_000, 17);
            let z = rep.fourth_moment.z_score(spec.fourth_moment());
            assert!(z.abs() <= 5.0, "{spec}: z = {z}");
        }
    }

    #[test]
    fn names_round_trip() {
        for spec in DistributionSpec::ALL {
            assert_eq!(spec.name().parse::<DistributionSpec>().unwrap(), spec);
            let json = serde_json::to_string(&spec).unwrap();
            assert_eq!(json, format!("\"{}\"", spec.name()));
        }
        assert!("cauchy".parse::<DistributionSpec>().is_err());
    }
}
