//! Monte Carlo estimators of volume and moments, independent of the exact
//! cone integration except for reading the facet list.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::distributions::{Estimate, SampleMatrix};
use crate::hull::{contains, Polytope};
use crate::moments::{cone_decomposition, MomentError};
use crate::rng::StreamKey;
use crate::simplex_geometry::facet_volume;

/// Rejection sampling degrades exponentially with dimension.
pub const MAX_REJECTION_DIM: usize = 6;
pub const MIN_ACCEPTED: usize = 1000;
const CHUNK: usize = 1 << 15;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("rejection sampling is limited to dimension {max}, got {dim}")]
    DimensionTooHigh { dim: usize, max: usize },
    #[error("only {accepted} of {proposals} proposals accepted (need {MIN_ACCEPTED})")]
    TooFewAccepted { accepted: usize, proposals: usize },
    #[error("reference point has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Moments(#[from] MomentError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimationMethod {
    Rejection,
    ConeSampler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub method: EstimationMethod,
    /// Only rejection sampling estimates volume.
    pub volume: Option<Estimate>,
    pub mean: Vec<Estimate>,
    /// Point about which second moments are taken.
    pub reference: Vec<f64>,
    /// `E |x - reference|^2`.
    pub second_moment: Estimate,
    #[serde(with = "crate::moments::row_major")]
    pub moment_matrix: DMatrix<f64>,
    #[serde(with = "crate::moments::row_major")]
    pub moment_matrix_stderr: DMatrix<f64>,
    pub samples_used: usize,
}

/// Running first and second moments of a point cloud about a fixed reference.
struct Accumulator {
    n: usize,
    count: usize,
    first: Vec<f64>,
    first_sq: Vec<f64>,
    outer: Vec<f64>,
    outer_sq: Vec<f64>,
    scalar: f64,
    scalar_sq: f64,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Accumulator {
            n,
            count: 0,
            first: vec![0.0; n],
            first_sq: vec![0.0; n],
            outer: vec![0.0; n * n],
            outer_sq: vec![0.0; n * n],
            scalar: 0.0,
            scalar_sq: 0.0,
        }
    }

    fn push(&mut self, d: &[f64]) {
        self.count += 1;
        let mut s = 0.0;
        for i in 0..self.n {
            self.first[i] += d[i];
            self.first_sq[i] += d[i] * d[i];
            s += d[i] * d[i];
            for j in 0..self.n {
                let p = d[i] * d[j];
                self.outer[i * self.n + j] += p;
                self.outer_sq[i * self.n + j] += p * p;
            }
        }
        self.scalar += s;
        self.scalar_sq += s * s;
    }

    fn merge(&mut self, other: &Accumulator) {
        self.count += other.count;
        let pairs = [
            (&mut self.first, &other.first),
            (&mut self.first_sq, &other.first_sq),
            (&mut self.outer, &other.outer),
            (&mut self.outer_sq, &other.outer_sq),
        ];
        for (a, b) in pairs {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.scalar += other.scalar;
        self.scalar_sq += other.scalar_sq;
    }

    fn estimate(sum: f64, sum_sq: f64, count: usize) -> Estimate {
        let m = count as f64;
        let mean = sum / m;
        let var = ((sum_sq - m * mean * mean) / (m - 1.0).max(1.0)).max(0.0);
        Estimate { value: mean, stderr: (var / m).sqrt() }
    }

    fn finish(self, method: EstimationMethod, reference: &[f64], volume: Option<Estimate>) -> MomentEstimate {
        let n = self.n;
        let c = self.count;
        let mean = (0..n)
            .map(|i| {
                let e = Self::estimate(self.first[i], self.first_sq[i], c);
                Estimate { value: e.value + reference[i], stderr: e.stderr }
            })
            .collect();
        let entries: Vec<Estimate> =
            (0..n * n).map(|k| Self::estimate(self.outer[k], self.outer_sq[k], c)).collect();
        MomentEstimate {
            method,
            volume,
            mean,
            reference: reference.to_vec(),
            second_moment: Self::estimate(self.scalar, self.scalar_sq, c),
            moment_matrix: DMatrix::from_row_iterator(n, n, entries.iter().map(|e| e.value)),
            moment_matrix_stderr: DMatrix::from_row_iterator(n, n, entries.iter().map(|e| e.stderr)),
            samples_used: c,
        }
    }
}

fn bounding_box(poly: &Polytope) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![f64::INFINITY; poly.dim];
    let mut hi = vec![f64::NEG_INFINITY; poly.dim];
    for v in &poly.vertices {
        for i in 0..poly.dim {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    (lo, hi)
}

fn check_reference(poly: &Polytope, reference: &[f64]) -> Result<(), OracleError> {
    if reference.len() != poly.dim {
        return Err(OracleError::DimensionMismatch { expected: poly.dim, got: reference.len() });
    }
    Ok(())
}

/// Uniform proposals in the vertex bounding box, filtered by membership.
pub fn rejection_mc(
    poly: &Polytope,
    proposals: usize,
    seed: u64,
    reference: &[f64],
) -> Result<MomentEstimate, OracleError> {
    let n = poly.dim;
    if n > MAX_REJECTION_DIM {
        return Err(OracleError::DimensionTooHigh { dim: n, max: MAX_REJECTION_DIM });
    }
    check_reference(poly, reference)?;
    let (lo, hi) = bounding_box(poly);
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let key = StreamKey::new(seed);
    let chunks = proposals.div_ceil(CHUNK);
    let parts: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = key.child(c as u64).rng();
            let mut acc = Accumulator::new(n);
            let mut x = vec![0.0; n];
            let mut d = vec![0.0; n];
            let len = CHUNK.min(proposals - c * CHUNK);
            for _ in 0..len {
                for i in 0..n {
                    x[i] = lo[i] + (hi[i] - lo[i]) * rng.open01();
                }
                if contains(poly, &x) {
                    for i in 0..n {
                        d[i] = x[i] - reference[i];
                    }
                    acc.push(&d);
                }
            }
            acc
        })
        .collect();
    let mut acc = Accumulator::new(n);
    parts.iter().for_each(|p| acc.merge(p));
    if acc.count < MIN_ACCEPTED {
        return Err(OracleError::TooFewAccepted { accepted: acc.count, proposals });
    }
    let p = acc.count as f64 / proposals as f64;
    let volume = Estimate {
        value: box_volume * p,
        stderr: box_volume * (p * (1.0 - p) / proposals as f64).sqrt(),
    };
    Ok(acc.finish(EstimationMethod::Rejection, reference, Some(volume)))
}

/// Exact uniform samples together with the facet index of the cone each came from.
pub fn sample_uniform_tagged(
    poly: &Polytope,
    apex: &[f64],
    count: usize,
    seed: u64,
) -> Result<(SampleMatrix, Vec<usize>), OracleError> {
    let n = poly.dim;
    let cones = cone_decomposition(poly, apex)?;
    let weights = cones
        .iter()
        .map(|c| {
            let area = facet_volume(&poly.facet_vertices(&poly.facets[c.facet])).map_err(MomentError::from)?;
            Ok(c.height * area)
        })
        .collect::<Result<Vec<f64>, OracleError>>()?;
    let picker = WeightedIndex::new(&weights).map_err(|_| MomentError::NumericallySingular { min: 0.0, max: 0.0 })?;
    let key = StreamKey::new(seed);
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<(Vec<f64>, Vec<usize>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = key.child(c as u64).rng();
            let len = CHUNK.min(count - c * CHUNK);
            let mut data = Vec::with_capacity(len * n);
            let mut tags = Vec::with_capacity(len);
            let mut w = vec![0.0; n];
            for _ in 0..len {
                let facet = cones[picker.sample(&mut rng)].facet;
                let verts = poly.facet_vertices(&poly.facets[facet]);
                let mut total = 0.0;
                for wi in w.iter_mut() {
                    *wi = rng.sample::<f64, _>(Exp1);
                    total += *wi;
                }
                let t = rng.open01().powf(1.0 / n as f64);
                for k in 0..n {
                    let y: f64 = verts.iter().zip(&w).map(|(v, wi)| wi * v[k]).sum::<f64>() / total;
                    data.push(apex[k] + t * (y - apex[k]));
                }
                tags.push(facet);
            }
            (data, tags)
        })
        .collect();
    let mut data = Vec::with_capacity(count * n);
    let mut tags = Vec::with_capacity(count);
    for (d, t) in parts {
        data.extend(d);
        tags.extend(t);
    }
    let points = SampleMatrix::from_vec(count, n, data, seed).map_err(|_| MomentError::DimensionMismatch {
        expected: n,
        got: 0,
    })?;
    Ok((points, tags))
}

/// Exact uniform samples from `poly` by the cone decomposition from `apex`.
pub fn sample_uniform(poly: &Polytope, apex: &[f64], count: usize, seed: u64) -> Result<SampleMatrix, OracleError> {
    Ok(sample_uniform_tagged(poly, apex, count, seed)?.0)
}

/// Mean and second-moment estimates from a uniform sample.
pub fn estimate_from_points(points: &SampleMatrix, reference: &[f64]) -> MomentEstimate {
    let n = points.cols();
    let mut acc = Accumulator::new(n);
    let mut d = vec![0.0; n];
    for p in points.iter_rows() {
        for i in 0..n {
            d[i] = p[i] - reference[i];
        }
        acc.push(&d);
    }
    acc.finish(EstimationMethod::ConeSampler, reference, None)
}

/// Cone sampler followed by [`estimate_from_points`].
pub fn cone_sampler_mc(
    poly: &Polytope,
    apex: &[f64],
    count: usize,
    seed: u64,
    reference: &[f64],
) -> Result<MomentEstimate, OracleError> {
    check_reference(poly, reference)?;
    Ok(estimate_from_points(&sample_uniform(poly, apex, count, seed)?, reference))
}

/// Pearson goodness of fit of observed facet tags against cone-volume probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

pub fn facet_frequency_test(poly: &Polytope, apex: &[f64], tags: &[usize]) -> Result<ChiSquareTest, OracleError> {
    let cones = cone_decomposition(poly, apex)?;
    let mut weights = vec![0.0; poly.facets.len()];
    for c in &cones {
        let area = facet_volume(&poly.facet_vertices(&poly.facets[c.facet])).map_err(MomentError::from)?;
        weights[c.facet] = c.height * area;
    }
    let total: f64 = weights.iter().sum();
    let mut observed = vec![0usize; weights.len()];
    for &t in tags {
        observed[t] += 1;
    }
    let m = tags.len() as f64;
    let statistic: f64 = weights
        .iter()
        .zip(&observed)
        .map(|(w, &o)| {
            let e = m * w / total;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = weights.len() - 1;
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN);
    Ok(ChiSquareTest { statistic, degrees_of_freedom: dof, p_value })
}
