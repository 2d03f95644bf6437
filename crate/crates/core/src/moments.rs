//! Exact volume, barycenter and second moments of simplicial polytopes.
//!
//! The polytope is split into cones from an apex `a` over its facets. The cone
//! over facet `F` at height `d_F = offset_F - <ν_F, a>` has volume
//! `d_F vol(F) / n`, centroid `a + n/(n+1) (c_F - a)`, and
//! `∫_cone (x - a)(x - a)^T dx = d_F / (n + 2) ∫_F (y - a)(y - a)^T dσ(y)`.
//! All facet sums are accumulated with compensated arithmetic in facet order.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hull::Polytope;
use crate::linalg::{symmetrize, CompensatedSum, CompensatedVec};
use crate::simplex_geometry::{simplex_moment_matrix, GeometryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("apex is within {height:e} of facet {facet}")]
    ApexOnBoundary { facet: usize, height: f64 },
    #[error("apex has dimension {got}, polytope has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("covariance is numerically singular (eigenvalues {min:e} .. {max:e})")]
    NumericallySingular { min: f64, max: f64 },
    #[error("map is not volume preserving (|det| = {det})")]
    NotVolumePreserving { det: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Serde adapter writing a matrix as an array of rows.
pub mod row_major {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }
}

/// Volume and moments of one polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub volume: f64,
    pub barycenter: Vec<f64>,
    pub apex: Vec<f64>,
    /// `(1/vol) ∫ |x - apex|^2 dx`.
    pub second_moment_scalar: f64,
    /// `(1/vol) ∫ (x - apex)(x - apex)^T dx`.
    #[serde(with = "row_major")]
    pub moment_matrix: DMatrix<f64>,
    /// Second moments about the barycenter.
    #[serde(with = "row_major")]
    pub covariance: DMatrix<f64>,
}

impl MomentSummary {
    /// `(1/vol) ∫ |x - z|^2 dx` for an arbitrary point `z`.
    pub fn second_moment_about(&self, z: &[f64]) -> f64 {
        let shift: f64 = self.barycenter.iter().zip(z).map(|(b, z)| (b - z).powi(2)).sum();
        self.covariance.trace() + shift
    }
}

/// Cone over one facet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone {
    pub facet: usize,
    pub height: f64,
}

fn check_apex(poly: &Polytope, apex: &[f64]) -> Result<(), MomentError> {
    if apex.len() != poly.dim {
        return Err(MomentError::DimensionMismatch { expected: poly.dim, got: apex.len() });
    }
    Ok(())
}

/// Height of the cone from `apex` over each facet. Every height must exceed
/// the polytope tolerance.
pub fn cone_decomposition(poly: &Polytope, apex: &[f64]) -> Result<Vec<Cone>, MomentError> {
    check_apex(poly, apex)?;
    let tol = poly.tolerance();
    poly.facets
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let height = -f.signed_distance(apex);
            if height <= tol {
                Err(MomentError::ApexOnBoundary { facet: i, height })
            } else {
                Ok(Cone { facet: i, height })
            }
        })
        .collect()
}

struct ConeIntegrals {
    volume: f64,
    /// `∫ (x - apex) dx`
    first: Vec<f64>,
    /// `∫ (x - apex)(x - apex)^T dx`
    second: DMatrix<f64>,
}

/// With `allow_boundary`, facets through the apex contribute flat cones;
/// any apex in the closed polytope is then admissible.
fn integrate(poly: &Polytope, apex: &[f64], allow_boundary: bool) -> Result<ConeIntegrals, MomentError> {
    check_apex(poly, apex)?;
    let n = poly.dim;
    let tol = poly.tolerance();
    let mut volume = CompensatedSum::default();
    let mut first = CompensatedVec::zeros(n);
    let mut second = CompensatedVec::zeros(n * n);
    let mut shift = vec![0.0; n];
    for (i, f) in poly.facets.iter().enumerate() {
        let height = -f.signed_distance(apex);
        if height <= tol {
            if allow_boundary && height >= -tol {
                continue;
            }
            return Err(MomentError::ApexOnBoundary { facet: i, height });
        }
        let m = simplex_moment_matrix(&poly.facet_vertices(f), apex)?;
        let cone_volume = height * m.volume / n as f64;
        volume.add(cone_volume);
        for (s, (c, a)) in shift.iter_mut().zip(m.centroid.iter().zip(apex)) {
            *s = c - a;
        }
        first.add_scaled(cone_volume * n as f64 / (n + 1) as f64, &shift);
        let w = height / (n + 2) as f64;
        for c in 0..n {
            for r in 0..n {
                second.add_at(c * n + r, w * m.moment_matrix[(r, c)]);
            }
        }
    }
    Ok(ConeIntegrals {
        volume: volume.value(),
        first: first.values(),
        second: DMatrix::from_column_slice(n, n, &second.values()),
    })
}

fn summary_from(poly: &Polytope, apex: &[f64], ints: ConeIntegrals) -> MomentSummary {
    let n = poly.dim;
    let vol = ints.volume;
    let offset: Vec<f64> = ints.first.iter().map(|x| x / vol).collect();
    let barycenter: Vec<f64> = apex.iter().zip(&offset).map(|(a, o)| a + o).collect();
    let moment_matrix = symmetrize(&(ints.second / vol));
    let covariance =
        symmetrize(&DMatrix::from_fn(n, n, |i, j| moment_matrix[(i, j)] - offset[i] * offset[j]));
    MomentSummary {
        volume: vol,
        barycenter,
        apex: apex.to_vec(),
        second_moment_scalar: moment_matrix.trace(),
        moment_matrix,
        covariance,
    }
}

/// All moments in one pass over the facets, about an interior `apex`.
pub fn summarize(poly: &Polytope, apex: &[f64]) -> Result<MomentSummary, MomentError> {
    let ints = integrate(poly, apex, false)?;
    Ok(summary_from(poly, apex, ints))
}

pub fn volume(poly: &Polytope, apex: &[f64]) -> Result<f64, MomentError> {
    Ok(integrate(poly, apex, false)?.volume)
}

/// `(1/n) Σ_F offset_F vol(F)`: volume by the divergence theorem.
pub fn volume_by_divergence(poly: &Polytope) -> Result<f64, MomentError> {
    let mut acc = CompensatedSum::default();
    for f in &poly.facets {
        let area = crate::simplex_geometry::facet_volume(&poly.facet_vertices(f))?;
        acc.add(f.offset * area);
    }
    Ok(acc.value() / poly.dim as f64)
}

/// `(1/vol) ∫ |x - apex|^2 dx`.
pub fn second_moment_scalar(poly: &Polytope, apex: &[f64]) -> Result<f64, MomentError> {
    check_apex(poly, apex)?;
    let n = poly.dim;
    let tol = poly.tolerance();
    let mut vol = CompensatedSum::default();
    let mut acc = CompensatedSum::default();
    for (i, f) in poly.facets.iter().enumerate() {
        let height = -f.signed_distance(apex);
        if height <= tol {
            return Err(MomentError::ApexOnBoundary { facet: i, height });
        }
        let m = simplex_moment_matrix(&poly.facet_vertices(f), apex)?;
        vol.add(height * m.volume / n as f64);
        acc.add(height / (n + 2) as f64 * m.moment_matrix.trace());
    }
    Ok(acc.value() / vol.value())
}

/// `(1/vol) ∫ (x - apex)(x - apex)^T dx`.
pub fn moment_matrix(poly: &Polytope, apex: &[f64]) -> Result<DMatrix<f64>, MomentError> {
    Ok(summarize(poly, apex)?.moment_matrix)
}

/// Preferred apex: the origin for symmetric bodies, the vertex average otherwise.
pub fn default_apex(poly: &Polytope) -> Vec<f64> {
    if poly.symmetric {
        vec![0.0; poly.dim]
    } else {
        poly.vertex_average()
    }
}

/// `preferred` if it is strictly interior, else the exact barycenter computed
/// from a vertex apex (admissible because flat cones contribute nothing).
pub fn resolve_apex(poly: &Polytope, preferred: &[f64]) -> Result<Vec<f64>, MomentError> {
    match cone_decomposition(poly, preferred) {
        Ok(_) => Ok(preferred.to_vec()),
        Err(MomentError::ApexOnBoundary { .. }) => fallback_apex(poly),
        Err(e) => Err(e),
    }
}

pub fn fallback_apex(poly: &Polytope) -> Result<Vec<f64>, MomentError> {
    let v0 = poly.vertices[0].clone();
    let ints = integrate(poly, &v0, true)?;
    Ok(v0.iter().zip(&ints.first).map(|(a, f)| a + f / ints.volume).collect())
}

pub fn barycenter(poly: &Polytope) -> Result<Vec<f64>, MomentError> {
    let apex = resolve_apex(poly, &default_apex(poly))?;
    Ok(summarize(poly, &apex)?.barycenter)
}

/// Moments recomputed with the exact barycenter as apex.
pub fn centered_summary(poly: &Polytope) -> Result<MomentSummary, MomentError> {
    let apex = resolve_apex(poly, &default_apex(poly))?;
    let first = summarize(poly, &apex)?;
    match summarize(poly, &first.barycenter) {
        Ok(s) => Ok(s),
        Err(MomentError::ApexOnBoundary { .. }) => Ok(first),
        Err(e) => Err(e),
    }
}

/// Covariance of the uniform measure; symmetric positive definite.
pub fn covariance(poly: &Polytope) -> Result<DMatrix<f64>, MomentError> {
    let cov = centered_summary(poly)?.covariance;
    check_nonsingular(&cov)?;
    Ok(cov)
}

pub(crate) fn check_nonsingular(cov: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>, MomentError> {
    let eig = SymmetricEigen::new(cov.clone());
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 1e-12 * max) {
        return Err(MomentError::NumericallySingular { min, max });
    }
    Ok(eig)
}

/// Sum of `d_F vol(F)` over facets (equals `n vol`).
pub fn height_area_sum(poly: &Polytope, apex: &[f64]) -> Result<f64, MomentError> {
    let mut acc = CompensatedSum::default();
    for c in cone_decomposition(poly, apex)? {
        let f = &poly.facets[c.facet];
        acc.add(c.height * crate::simplex_geometry::facet_volume(&poly.facet_vertices(f))?);
    }
    Ok(acc.value())
}

/// Largest facet mean square distance `(1/vol F) ∫_F |x - z|^2 dσ` over all facets.
pub fn max_facet_mean_square(poly: &Polytope, z: &[f64]) -> Result<f64, MomentError> {
    check_apex(poly, z)?;
    let mut best = 0.0f64;
    for f in &poly.facets {
        let m = simplex_moment_matrix(&poly.facet_vertices(f), z)?;
        best = best.max(m.mean_square_distance());
    }
    Ok(best)
}
