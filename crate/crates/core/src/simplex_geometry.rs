//! Closed-form volume and second moments of simplices.
//!
//! For a simplex with `k` vertices `v_1..v_k` and the uniform measure on it,
//! `E[(x - z)(x - z)^T] = (sum_i w_i w_i^T + s s^T) / (k (k + 1))` where
//! `w_i = v_i - z` and `s = sum_i w_i`. For the standard simplex
//! `conv{e_1..e_n}` this is the matrix with entries `(1 + δ_ij) / (n (n + 1))`.

use nalgebra::DMatrix;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{factorial, HouseholderQr};

/// Relative threshold on the diagonal of R below which a simplex is flat.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("simplex vertices are affinely dependent")]
    DegenerateSimplex,
    #[error("expected points of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Surface volume, centroid and second-moment matrix of a simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexFacetMoment {
    pub volume: f64,
    pub centroid: Vec<f64>,
    /// `∫_F (x - z)(x - z)^T dσ(x)` about `reference`.
    #[serde(with = "crate::moments::row_major")]
    pub moment_matrix: DMatrix<f64>,
    pub reference: Vec<f64>,
}

impl SimplexFacetMoment {
    /// `(1 / vol F) ∫_F |x - z|^2 dσ`.
    pub fn mean_square_distance(&self) -> f64 {
        self.moment_matrix.trace() / self.volume
    }
}

fn check_dims(vertices: &[&[f64]]) -> Result<usize, GeometryError> {
    let d = vertices.first().map_or(0, |v| v.len());
    if vertices.is_empty() || vertices.len() > d + 1 {
        return Err(GeometryError::DegenerateSimplex);
    }
    if let Some(v) = vertices.iter().find(|v| v.len() != d) {
        return Err(GeometryError::DimensionMismatch { expected: d, got: v.len() });
    }
    Ok(d)
}

/// `(k-1)`-dimensional volume of the simplex on `k` vertices in `R^d`,
/// `sqrt(det(E^T E)) / (k - 1)!` with E the edge vectors from the first vertex.
/// A single vertex has volume 1 (counting measure).
pub fn facet_volume(vertices: &[&[f64]]) -> Result<f64, GeometryError> {
    let d = check_dims(vertices)?;
    let k = vertices.len();
    let base = vertices[0];
    let mut edges = Vec::with_capacity(d * (k - 1));
    let mut longest = 0.0f64;
    for v in &vertices[1..] {
        let start = edges.len();
        edges.extend(v.iter().zip(base).map(|(a, b)| a - b));
        longest = longest.max(edges[start..].iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    let qr = HouseholderQr::new(edges, d, k - 1);
    if qr.r_diag().iter().any(|r| r.abs() <= SIMPLEX_TOLERANCE * longest) {
        return Err(GeometryError::DegenerateSimplex);
    }
    Ok(qr.gram_sqrt_det() / factorial(k - 1))
}

/// `E X_i X_j` for `X` uniform on `conv{e_1..e_n}`, as exact rationals.
pub fn regular_simplex_covariance(n: usize) -> DMatrix<Ratio<i64>> {
    assert!(n >= 1, "dimension must be positive");
    let denom = (n * (n + 1)) as i64;
    DMatrix::from_fn(n, n, |i, j| Ratio::new(if i == j { 2 } else { 1 }, denom))
}

/// Volume, centroid and `∫_F (x - z)(x - z)^T dσ` for the simplex `vertices`.
pub fn simplex_moment_matrix(vertices: &[&[f64]], z: &[f64]) -> Result<SimplexFacetMoment, GeometryError> {
    let d = check_dims(vertices)?;
    if z.len() != d {
        return Err(GeometryError::DimensionMismatch { expected: d, got: z.len() });
    }
    let volume = facet_volume(vertices)?;
    let k = vertices.len();
    let (raw, s) = raw_moment_sums(vertices, z);
    let mut m = raw;
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] += s[i] * s[j];
        }
    }
    m *= volume / (k * (k + 1)) as f64;
    let centroid = (0..d).map(|i| vertices.iter().map(|v| v[i]).sum::<f64>() / k as f64).collect();
    Ok(SimplexFacetMoment { volume, centroid, moment_matrix: m, reference: z.to_vec() })
}

/// `(sum_i w_i w_i^T, sum_i w_i)` with `w_i = v_i - z`.
pub(crate) fn raw_moment_sums(vertices: &[&[f64]], z: &[f64]) -> (DMatrix<f64>, Vec<f64>) {
    let d = z.len();
    let mut raw = DMatrix::zeros(d, d);
    let mut s = vec![0.0; d];
    let mut w = vec![0.0; d];
    for v in vertices {
        for i in 0..d {
            w[i] = v[i] - z[i];
            s[i] += w[i];
        }
        for i in 0..d {
            for j in i..d {
                raw[(i, j)] += w[i] * w[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            raw[(i, j)] = raw[(j, i)];
        }
    }
    (raw, s)
}
