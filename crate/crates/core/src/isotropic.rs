//! Isotropic constant by covariance whitening.
//!
//! For a body K with covariance Σ and volume V, the volume-preserving affine
//! maps T minimize `V^{-(1+2/n)} ∫_K |Tx|^2 dx` at `T x = det(Σ)^{1/(2n)}
//! Σ^{-1/2} (x - b)` (b the barycenter), where the value is
//! `n det(Σ)^{1/n} / V^{2/n}`. Hence `L_K^2 = det(Σ)^{1/n} / V^{2/n}`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::hull::Polytope;
use crate::linalg::determinant;
use crate::moments::{centered_summary, check_nonsingular, MomentError, MomentSummary};

/// Relative tolerance on `|det| = 1` for volume-preserving maps.
pub const VOLUME_PRESERVING_TOLERANCE: f64 = 1e-9;

/// `x -> linear x + translation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    #[serde(with = "crate::moments::row_major")]
    pub linear: DMatrix<f64>,
    pub translation: Vec<f64>,
}

impl AffineMap {
    pub fn identity(n: usize) -> Self {
        AffineMap { linear: DMatrix::identity(n, n), translation: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let y = &self.linear * DVector::from_column_slice(x);
        y.iter().zip(&self.translation).map(|(a, b)| a + b).collect()
    }

    pub fn determinant(&self) -> f64 {
        determinant(&self.linear)
    }

    pub fn linear_rows(&self) -> Vec<Vec<f64>> {
        self.linear.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Image of a polytope (same facet combinatorics).
    pub fn image(&self, poly: &Polytope) -> Result<Polytope, crate::hull::HullError> {
        poly.affine_image(&self.linear_rows(), &self.translation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropicResult {
    pub l_constant: f64,
    /// Volume-preserving map sending the body to isotropic position.
    pub whitening_map: AffineMap,
    pub log_det_cov: f64,
    pub volume: f64,
}

impl IsotropicResult {
    pub fn l_squared(&self) -> f64 {
        self.l_constant * self.l_constant
    }
}

/// Isotropic constant from exact moments already computed about the barycenter.
pub fn isotropic_from_summary(summary: &MomentSummary) -> Result<IsotropicResult, MomentError> {
    let n = summary.barycenter.len();
    let nf = n as f64;
    let eig = check_nonsingular(&summary.covariance)?;
    let log_det_cov: f64 = eig.eigenvalues.iter().map(|l| l.ln()).sum();
    let log_l2 = log_det_cov / nf - 2.0 * summary.volume.ln() / nf;
    // det(Σ)^{1/(2n)} Σ^{-1/2}
    let scale = (log_det_cov / (2.0 * nf)).exp();
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| scale / l.sqrt()));
    let linear = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    let shift = &linear * DVector::from_column_slice(&summary.barycenter);
    Ok(IsotropicResult {
        l_constant: (0.5 * log_l2).exp(),
        whitening_map: AffineMap { linear, translation: shift.iter().map(|x| -x).collect() },
        log_det_cov,
        volume: summary.volume,
    })
}

pub fn isotropic_constant(poly: &Polytope) -> Result<IsotropicResult, MomentError> {
    isotropic_from_summary(&centered_summary(poly)?)
}

/// `vol^{-(1+2/n)} ∫_K |T x|^2 dx`, integrated exactly over the image `T K`.
pub fn functional_value(poly: &Polytope, map: &AffineMap) -> Result<f64, MomentError> {
    let n = poly.dim;
    if map.dim() != n || map.linear.nrows() != n || map.linear.ncols() != n {
        return Err(MomentError::DimensionMismatch { expected: n, got: map.dim() });
    }
    let det = map.determinant();
    if !((det.abs() - 1.0).abs() <= VOLUME_PRESERVING_TOLERANCE) {
        return Err(MomentError::NotVolumePreserving { det: det.abs() });
    }
    let image = map
        .image(poly)
        .map_err(|_| MomentError::NotVolumePreserving { det: det.abs() })?;
    let s = centered_summary(&image)?;
    let mean_square = s.second_moment_about(&vec![0.0; n]);
    Ok(mean_square * s.volume.powf(-2.0 / n as f64))
}

/// Random element of `SL_n` (up to sign) times a random translation:
/// a gaussian matrix rescaled to `|det| = 1`.
pub fn random_volume_preserving_map<R: Rng + ?Sized>(n: usize, translation_scale: f64, rng: &mut R) -> AffineMap {
    loop {
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let det = determinant(&g);
        if det.abs() < 1e-6 {
            continue;
        }
        let linear = g / det.abs().powf(1.0 / n as f64);
        let translation = (0..n).map(|_| translation_scale * rng.sample::<f64, _>(StandardNormal)).collect();
        return AffineMap { linear, translation };
    }
}

/// Random invertible affine map with condition number bounded by `max_cond`.
pub fn random_affine_map<R: Rng + ?Sized>(n: usize, max_cond: f64, rng: &mut R) -> AffineMap {
    loop {
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let sv = g.clone().svd(false, false).singular_values;
        let cond = sv.max() / sv.min();
        if cond.is_finite() && cond <= max_cond {
            let translation = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            return AffineMap { linear: g, translation };
        }
    }
}

/// `(n-1)`-volume of the section of `poly` by the hyperplane through the
/// origin with unit normal `theta`. Supported for `n = 2, 3`; the origin must
/// be interior.
pub fn central_section_volume(poly: &Polytope, theta: &[f64]) -> Option<f64> {
    let n = poly.dim;
    let side = |v: &[f64]| crate::linalg::dot(v, theta);
    match n {
        2 => {
            // the line meets the boundary in two points; sum their norms
            let mut total = 0.0;
            let mut hits = 0;
            for f in &poly.facets {
                let a = &poly.vertices[f.vertex_ids[0]];
                let b = &poly.vertices[f.vertex_ids[1]];
                let (sa, sb) = (side(a), side(b));
                if (sa > 0.0) != (sb > 0.0) {
                    let t = sa / (sa - sb);
                    let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                    total += (p[0] * p[0] + p[1] * p[1]).sqrt();
                    hits += 1;
                }
            }
            (hits == 2).then_some(total)
        }
        3 => {
            // each crossing facet contributes a boundary segment (p, q) of the
            // convex section polygon; area = Σ |p × q| / 2
            let mut area = 0.0;
            for f in &poly.facets {
                let vs: Vec<&[f64]> = poly.facet_vertices(f);
                let sides: Vec<f64> = vs.iter().map(|v| side(v)).collect();
                let mut cut = Vec::with_capacity(2);
                for i in 0..3 {
                    let j = (i + 1) % 3;
                    if (sides[i] > 0.0) != (sides[j] > 0.0) {
                        let t = sides[i] / (sides[i] - sides[j]);
                        cut.push([
                            vs[i][0] + t * (vs[j][0] - vs[i][0]),
                            vs[i][1] + t * (vs[j][1] - vs[i][1]),
                            vs[i][2] + t * (vs[j][2] - vs[i][2]),
                        ]);
                    }
                }
                if cut.len() == 2 {
                    let (p, q) = (cut[0], cut[1]);
                    let cross = [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
                    area += 0.5 * (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
                }
            }
            Some(area)
        }
        _ => None,
    }
}

/// Largest central section over `directions` random hyperplanes, after moving
/// the body to volume-one isotropic position.
pub fn max_isotropic_section<R: Rng + ?Sized>(
    poly: &Polytope,
    directions: usize,
    rng: &mut R,
) -> Result<Option<f64>, MomentError> {
    let iso = isotropic_constant(poly)?;
    let n = poly.dim;
    let unit = (-(iso.volume.ln()) / n as f64).exp();
    let mut map = iso.whitening_map.clone();
    map.linear *= unit;
    map.translation.iter_mut().for_each(|t| *t *= unit);
    let body = map.image(poly).map_err(|_| MomentError::NotVolumePreserving { det: 0.0 })?;
    let mut best: Option<f64> = None;
    for _ in 0..directions {
        let mut u: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let len = crate::linalg::norm(&u);
        u.iter_mut().for_each(|x| *x /= len);
        if let Some(a) = central_section_volume(&body, &u) {
            best = Some(best.map_or(a, |b: f64| b.max(a)));
        }
    }
    Ok(best)
}
