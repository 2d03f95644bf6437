//! Simplicial facet complexes of convex hulls in `R^n`.
//!
//! Construction is randomized incremental beneath-beyond: start from a
//! full-dimensional simplex chosen by a greedy affine-independence scan, then
//! insert points in a seeded random order. Every pending point is attached to
//! one facet it lies beyond (its conflict facet); inserting a point walks the
//! visible region from that facet, cones the horizon ridges to the new point and
//! hands the orphaned pending points to the new facets.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::SampleMatrix;
use crate::linalg::{dot, norm, HouseholderQr};
use crate::rng::StreamKey;

pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_FACET_BUDGET: usize = 2_000_000;
pub const DEFAULT_MAX_DIM: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error("need at least {needed} points in dimension {dim}, got {got}")]
    InsufficientPoints { dim: usize, needed: usize, got: usize },
    #[error("dimension {dim} exceeds the configured maximum {max}")]
    DimensionTooHigh { dim: usize, max: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("facet budget of {budget} exceeded")]
    FacetBudgetExceeded { budget: usize },
    #[error("point has dimension {got}, polytope has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("center lies outside the polytope (violation {violation:e})")]
    CenterOutside { violation: f64 },
}

/// What to do when a point lies within tolerance of a facet hyperplane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoplanarPolicy {
    /// Fail with `DegenerateInput`. Right for laws with a density, where this
    /// happens with probability zero.
    Reject,
    /// Treat the point as beneath the facet. Coplanar boundary pieces come out
    /// as several simplicial facets sharing one hyperplane.
    Triangulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullOptions {
    /// Tolerance relative to the largest point norm.
    pub relative_tolerance: f64,
    pub facet_budget: usize,
    pub max_dim: usize,
    pub coplanar: CoplanarPolicy,
    /// Seed of the insertion order.
    pub order_seed: u64,
}

impl Default for HullOptions {
    fn default() -> Self {
        HullOptions {
            relative_tolerance: DEFAULT_RELATIVE_TOLERANCE,
            facet_budget: DEFAULT_FACET_BUDGET,
            max_dim: DEFAULT_MAX_DIM,
            coplanar: CoplanarPolicy::Reject,
            order_seed: 0x5EED,
        }
    }
}

impl HullOptions {
    pub fn triangulating() -> Self {
        HullOptions { coplanar: CoplanarPolicy::Triangulate, ..Self::default() }
    }
}

/// A simplicial facet: `dim` vertex indices and the supporting hyperplane
/// `<normal, y> = offset` with outward unit normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub vertex_ids: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Facet {
    /// Signed distance of `x` from the facet hyperplane (positive outside).
    #[inline]
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }
}

/// Vertices plus simplicial facets of a full-dimensional convex polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
    pub symmetric: bool,
}

impl Polytope {
    pub fn facet_vertices(&self, facet: &Facet) -> Vec<&[f64]> {
        facet.vertex_ids.iter().map(|&i| self.vertices[i].as_slice()).collect()
    }

    /// Largest vertex norm (at least 1).
    pub fn scale(&self) -> f64 {
        self.vertices.iter().map(|v| norm(v)).fold(1.0, f64::max)
    }

    /// Absolute tolerance used by membership and interiority tests.
    pub fn tolerance(&self) -> f64 {
        DEFAULT_RELATIVE_TOLERANCE * self.scale()
    }

    pub fn vertex_average(&self) -> Vec<f64> {
        let mut avg = vec![0.0; self.dim];
        for v in &self.vertices {
            for (a, x) in avg.iter_mut().zip(v) {
                *a += x;
            }
        }
        avg.iter_mut().for_each(|a| *a /= self.vertices.len() as f64);
        avg
    }

    /// Image under `x -> linear * x + translation` (`linear` row-major),
    /// keeping the facet combinatorics and recomputing every hyperplane.
    pub fn affine_image(&self, linear: &[Vec<f64>], translation: &[f64]) -> Result<Polytope, HullError> {
        let n = self.dim;
        if linear.len() != n || translation.len() != n || linear.iter().any(|r| r.len() != n) {
            return Err(HullError::DimensionMismatch { expected: n, got: translation.len() });
        }
        let vertices: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| (0..n).map(|i| dot(&linear[i], v) + translation[i]).collect())
            .collect();
        let mut image = Polytope { dim: n, vertices, facets: Vec::with_capacity(self.facets.len()), symmetric: false };
        let interior = image.vertex_average();
        let tol = image.tolerance();
        for f in &self.facets {
            let pts = image.facet_vertices(f);
            let (normal, offset) = facet_plane(&pts, &interior, tol)
                .ok_or_else(|| HullError::DegenerateInput("affine image collapses a facet".into()))?;
            image.facets.push(Facet { vertex_ids: f.vertex_ids.clone(), normal, offset });
        }
        image.symmetric = self.symmetric && translation.iter().all(|&t| t == 0.0);
        Ok(image)
    }
}

/// Outward hyperplane through the `dim` points `pts`, oriented so that
/// `interior` lies beneath it. `None` if the points are affinely dependent
/// within `tol`.
pub(crate) fn facet_plane(pts: &[&[f64]], interior: &[f64], tol: f64) -> Option<(Vec<f64>, f64)> {
    let n = interior.len();
    debug_assert_eq!(pts.len(), n);
    let base = pts[0];
    let mut edges = Vec::with_capacity(n * (n - 1));
    for p in &pts[1..] {
        edges.extend(p.iter().zip(base).map(|(a, b)| a - b));
    }
    let qr = HouseholderQr::new(edges, n, n - 1);
    if qr.r_diag().iter().any(|r| r.abs() <= tol) {
        return None;
    }
    let mut normal = qr.normal();
    let mut offset = pts.iter().map(|p| dot(&normal, p)).sum::<f64>() / n as f64;
    if dot(&normal, interior) > offset {
        normal.iter_mut().for_each(|x| *x = -*x);
        offset = -offset;
    }
    Some((normal, offset))
}

const NONE: u32 = u32::MAX;

struct WorkFacet {
    verts: Vec<u32>,
    /// `neighbors[i]` shares the ridge opposite `verts[i]`.
    neighbors: Vec<u32>,
    normal: Vec<f64>,
    offset: f64,
    alive: bool,
    outside: Vec<u32>,
    stamp: u32,
    visible: bool,
}

struct Builder<'a> {
    points: &'a SampleMatrix,
    dim: usize,
    tol: f64,
    opts: HullOptions,
    interior: Vec<f64>,
    facets: Vec<WorkFacet>,
    alive: usize,
    conflict: Vec<u32>,
    stamp: u32,
}

impl<'a> Builder<'a> {
    #[inline]
    fn dist(&self, f: u32, p: u32) -> f64 {
        let f = &self.facets[f as usize];
        dot(&f.normal, self.points.row(p as usize)) - f.offset
    }

    /// Interim facets of symmetric inputs routinely pass through the origin
    /// and contain negated vertices, so coplanarity is judged on the final
    /// complex only: no input point may lie on the hyperplane of a facet it
    /// does not span.
    fn check_general_position(&self) -> Result<(), HullError> {
        for (id, f) in self.facets.iter().enumerate().filter(|(_, f)| f.alive) {
            for p in 0..self.points.rows() as u32 {
                if f.verts.contains(&p) {
                    continue;
                }
                let d = self.dist(id as u32, p);
                if d >= -self.tol {
                    return Err(HullError::DegenerateInput(format!(
                        "point {p} lies within {:e} of a facet hyperplane",
                        d.abs().max(self.tol)
                    )));
                }
            }
        }
        Ok(())
    }

    fn push_facet(&mut self, verts: Vec<u32>) -> Result<u32, HullError> {
        let pts: Vec<&[f64]> = verts.iter().map(|&v| self.points.row(v as usize)).collect();
        let (normal, offset) = facet_plane(&pts, &self.interior, self.tol)
            .ok_or_else(|| HullError::DegenerateInput("new facet is not a proper simplex".into()))?;
        let id = self.facets.len() as u32;
        let n = verts.len();
        self.facets.push(WorkFacet {
            verts,
            neighbors: vec![NONE; n],
            normal,
            offset,
            alive: true,
            outside: Vec::new(),
            stamp: 0,
            visible: false,
        });
        self.alive += 1;
        if self.alive > self.opts.facet_budget {
            return Err(HullError::FacetBudgetExceeded { budget: self.opts.facet_budget });
        }
        Ok(id)
    }

    /// Pairs up the open ridges of `ids`; the slot holding `skip` is left alone.
    fn link_ridges(&mut self, ids: &[u32], skip: Option<u32>) {
        let mut open: HashMap<Vec<u32>, (u32, usize)> = HashMap::with_capacity(ids.len() * self.dim);
        for &id in ids {
            for slot in 0..self.dim {
                let f = &self.facets[id as usize];
                if Some(f.verts[slot]) == skip {
                    continue;
                }
                let key: Vec<u32> =
                    f.verts.iter().enumerate().filter(|&(i, _)| i != slot).map(|(_, &v)| v).collect();
                if let Some((other, other_slot)) = open.remove(&key) {
                    self.facets[id as usize].neighbors[slot] = other;
                    self.facets[other as usize].neighbors[other_slot] = id;
                } else {
                    open.insert(key, (id, slot));
                }
            }
        }
        debug_assert!(open.is_empty(), "unmatched ridges");
    }

    fn initial_simplex(&mut self) -> Result<Vec<u32>, HullError> {
        let n = self.dim;
        let m = self.points.rows();
        let centroid = self.points.row_mean();
        let far = (0..m)
            .max_by(|&a, &b| {
                let da = norm(&crate::linalg::sub(self.points.row(a), &centroid));
                let db = norm(&crate::linalg::sub(self.points.row(b), &centroid));
                da.total_cmp(&db)
            })
            .expect("non-empty");
        let origin = self.points.row(far);
        let mut chosen = vec![far];
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut best = (0usize, -1.0f64, Vec::new());
            for i in 0..m {
                let mut r = crate::linalg::sub(self.points.row(i), origin);
                for _ in 0..2 {
                    for b in &basis {
                        let c = dot(&r, b);
                        r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                    }
                }
                let d = norm(&r);
                if d > best.1 {
                    best = (i, d, r);
                }
            }
            if best.1 <= self.tol {
                return Err(HullError::DegenerateInput(format!(
                    "points span an affine subspace of dimension {} < {n}",
                    basis.len()
                )));
            }
            let (i, d, mut r) = best;
            r.iter_mut().for_each(|x| *x /= d);
            basis.push(r);
            chosen.push(i);
        }
        self.interior = vec![0.0; n];
        for &c in &chosen {
            for (a, x) in self.interior.iter_mut().zip(self.points.row(c)) {
                *a += x / (n + 1) as f64;
            }
        }
        let mut ids = Vec::with_capacity(n + 1);
        for skip in 0..=n {
            let mut verts: Vec<u32> = chosen.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &c)| c as u32).collect();
            verts.sort_unstable();
            ids.push(self.push_facet(verts)?);
        }
        self.link_ridges(&ids, None);
        Ok(chosen.into_iter().map(|c| c as u32).collect())
    }

    /// Attaches `p` to the first facet in `candidates` it lies beyond.
    fn assign(&mut self, p: u32, candidates: &[u32]) {
        self.conflict[p as usize] = NONE;
        for &f in candidates {
            if self.dist(f, p) > self.tol {
                self.conflict[p as usize] = f;
                self.facets[f as usize].outside.push(p);
                return;
            }
        }
    }

    fn insert(&mut self, p: u32) -> Result<(), HullError> {
        let start = self.conflict[p as usize];
        self.stamp += 1;
        let stamp = self.stamp;
        let mut visible = vec![start];
        let mut horizon: Vec<(u32, usize)> = Vec::new();
        {
            let f = &mut self.facets[start as usize];
            f.stamp = stamp;
            f.visible = true;
        }
        let mut cursor = 0;
        while cursor < visible.len() {
            let f = visible[cursor];
            cursor += 1;
            for slot in 0..self.dim {
                let g = self.facets[f as usize].neighbors[slot];
                let (g_stamp, g_visible) = {
                    let gf = &self.facets[g as usize];
                    (gf.stamp, gf.visible)
                };
                if g_stamp == stamp {
                    if !g_visible {
                        horizon.push((f, slot));
                    }
                    continue;
                }
                let d = self.dist(g, p);
                let gf = &mut self.facets[g as usize];
                gf.stamp = stamp;
                if d > self.tol {
                    gf.visible = true;
                    visible.push(g);
                } else {
                    gf.visible = false;
                    horizon.push((f, slot));
                }
            }
        }

        let mut created = Vec::with_capacity(horizon.len());
        for &(f, slot) in &horizon {
            let (mut verts, beyond) = {
                let wf = &self.facets[f as usize];
                let verts: Vec<u32> = wf.verts.iter().enumerate().filter(|&(i, _)| i != slot).map(|(_, &v)| v).collect();
                (verts, wf.neighbors[slot])
            };
            verts.push(p);
            verts.sort_unstable();
            let id = self.push_facet(verts)?;
            let p_slot = self.facets[id as usize].verts.iter().position(|&v| v == p).expect("apex present");
            self.facets[id as usize].neighbors[p_slot] = beyond;
            let back = self.facets[beyond as usize].neighbors.iter().position(|&g| g == f).expect("adjacency is symmetric");
            self.facets[beyond as usize].neighbors[back] = id;
            created.push(id);
        }
        self.link_ridges(&created, Some(p));

        let mut orphans = Vec::new();
        for &f in &visible {
            let wf = &mut self.facets[f as usize];
            wf.alive = false;
            orphans.append(&mut wf.outside);
        }
        self.alive -= visible.len();
        for q in orphans {
            if q != p {
                self.assign(q, &created);
            }
        }
        self.conflict[p as usize] = NONE;
        Ok(())
    }

    fn finish(self, symmetric: bool) -> Polytope {
        let mut used = vec![NONE; self.points.rows()];
        for f in self.facets.iter().filter(|f| f.alive) {
            for &v in &f.verts {
                used[v as usize] = 0;
            }
        }
        let mut vertices = Vec::new();
        for (i, u) in used.iter_mut().enumerate() {
            if *u == 0 {
                *u = vertices.len() as u32;
                vertices.push(self.points.row(i).to_vec());
            }
        }
        let facets = self
            .facets
            .into_iter()
            .filter(|f| f.alive)
            .map(|f| Facet {
                vertex_ids: f.verts.iter().map(|&v| used[v as usize] as usize).collect(),
                normal: f.normal,
                offset: f.offset,
            })
            .collect();
        Polytope { dim: self.dim, vertices, facets, symmetric }
    }
}

fn build(points: &SampleMatrix, opts: &HullOptions, symmetric: bool) -> Result<Polytope, HullError> {
    let n = points.cols();
    if n > opts.max_dim {
        return Err(HullError::DimensionTooHigh { dim: n, max: opts.max_dim });
    }
    if points.rows() < n + 1 {
        return Err(HullError::InsufficientPoints { dim: n, needed: n + 1, got: points.rows() });
    }
    if points.rows() >= NONE as usize {
        return Err(HullError::FacetBudgetExceeded { budget: opts.facet_budget });
    }
    let scale = points.iter_rows().map(norm).fold(0.0, f64::max);
    let mut b = Builder {
        points,
        dim: n,
        tol: opts.relative_tolerance * scale,
        opts: *opts,
        interior: Vec::new(),
        facets: Vec::new(),
        alive: 0,
        conflict: vec![NONE; points.rows()],
        stamp: 0,
    };
    if scale == 0.0 {
        return Err(HullError::DegenerateInput("all points coincide with the origin".into()));
    }
    let simplex = b.initial_simplex()?;
    let initial: Vec<u32> = (0..b.facets.len() as u32).collect();
    let mut order: Vec<u32> = (0..points.rows() as u32).filter(|i| !simplex.contains(i)).collect();
    order.shuffle(&mut StreamKey::new(opts.order_seed).rng());
    for &p in &order {
        b.assign(p, &initial);
    }
    for &p in &order {
        if b.conflict[p as usize] != NONE {
            b.insert(p)?;
        }
    }
    if opts.coplanar == CoplanarPolicy::Reject {
        b.check_general_position()?;
    }
    Ok(b.finish(symmetric))
}

/// Facet complex of `conv(points)`; one point per row.
pub fn convex_hull(points: &SampleMatrix) -> Result<Polytope, HullError> {
    convex_hull_with(points, &HullOptions::default())
}

pub fn convex_hull_with(points: &SampleMatrix, opts: &HullOptions) -> Result<Polytope, HullError> {
    build(points, opts, false)
}

/// Facet complex of `conv(±points)`.
pub fn symmetric_hull(points: &SampleMatrix) -> Result<Polytope, HullError> {
    symmetric_hull_with(points, &HullOptions::default())
}

pub fn symmetric_hull_with(points: &SampleMatrix, opts: &HullOptions) -> Result<Polytope, HullError> {
    let n = points.cols();
    if points.rows() < n {
        return Err(HullError::InsufficientPoints { dim: n, needed: n, got: points.rows() });
    }
    build(&points.with_negatives(), opts, true)
}

/// Membership up to the polytope tolerance (boundary counts as inside).
pub fn contains(poly: &Polytope, x: &[f64]) -> bool {
    let tol = poly.tolerance();
    x.len() == poly.dim && poly.facets.iter().all(|f| f.signed_distance(x) <= tol)
}

/// Radius of the largest ball about `center` inside `poly`.
pub fn inradius(poly: &Polytope, center: &[f64]) -> Result<f64, HullError> {
    if center.len() != poly.dim {
        return Err(HullError::DimensionMismatch { expected: poly.dim, got: center.len() });
    }
    let slack = poly.facets.iter().map(|f| -f.signed_distance(center)).fold(f64::INFINITY, f64::min);
    if slack < -poly.tolerance() {
        return Err(HullError::CenterOutside { violation: -slack });
    }
    Ok(slack.max(0.0))
}

/// Worst-case violations found by [`validate_polytope`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeDiagnostics {
    pub facet_count: usize,
    /// Largest `<normal, p> - offset` over input points and facets.
    pub max_point_violation: f64,
    /// Largest distance of a facet vertex from its facet hyperplane.
    pub max_vertex_residual: f64,
    pub max_normal_error: f64,
    pub non_simplicial_facets: usize,
    /// Facets whose vertices are affinely dependent.
    pub flat_facets: usize,
    /// Ridges not shared by exactly two facets.
    pub unpaired_ridges: usize,
    /// Facets of a symmetric polytope with no facet of opposite normal.
    pub unmatched_antipodes: usize,
    /// Vertices of a symmetric polytope whose negative is not a vertex.
    pub unmatched_vertices: usize,
    /// `(2eN/n)^n` counting bound, for symmetric polytopes.
    pub facet_cap: Option<f64>,
}

impl PolytopeDiagnostics {
    pub fn worst_violation(&self) -> f64 {
        self.max_point_violation.max(self.max_vertex_residual).max(self.max_normal_error)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.worst_violation() <= tol
            && self.non_simplicial_facets == 0
            && self.flat_facets == 0
            && self.unpaired_ridges == 0
            && self.unmatched_antipodes == 0
            && self.unmatched_vertices == 0
            && self.facet_cap.is_none_or(|cap| self.facet_count as f64 <= cap)
    }
}

fn approx_eq_slices(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

pub fn validate_polytope(poly: &Polytope, points: &SampleMatrix) -> PolytopeDiagnostics {
    let n = poly.dim;
    let tol = poly.tolerance();
    let mut d = PolytopeDiagnostics {
        facet_count: poly.facets.len(),
        max_point_violation: 0.0,
        max_vertex_residual: 0.0,
        max_normal_error: 0.0,
        non_simplicial_facets: 0,
        flat_facets: 0,
        unpaired_ridges: 0,
        unmatched_antipodes: 0,
        unmatched_vertices: 0,
        facet_cap: None,
    };
    let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
    let interior = poly.vertex_average();
    for f in &poly.facets {
        d.max_normal_error = d.max_normal_error.max((norm(&f.normal) - 1.0).abs());
        if f.vertex_ids.len() != n {
            d.non_simplicial_facets += 1;
            continue;
        }
        let pts = poly.facet_vertices(f);
        for v in &pts {
            d.max_vertex_residual = d.max_vertex_residual.max(f.signed_distance(v).abs());
        }
        for v in &poly.vertices {
            d.max_point_violation = d.max_point_violation.max(f.signed_distance(v));
        }
        for p in points.iter_rows().filter(|p| p.len() == n) {
            d.max_point_violation = d.max_point_violation.max(f.signed_distance(p));
            if poly.symmetric {
                let neg: Vec<f64> = p.iter().map(|x| -x).collect();
                d.max_point_violation = d.max_point_violation.max(f.signed_distance(&neg));
            }
        }
        if facet_plane(&pts, &interior, tol).is_none() {
            d.flat_facets += 1;
        }
        let mut ids = f.vertex_ids.clone();
        ids.sort_unstable();
        for skip in 0..n {
            let key: Vec<usize> = ids.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
            *ridges.entry(key).or_default() += 1;
        }
    }
    d.unpaired_ridges = ridges.values().filter(|&&c| c != 2).count();

    if poly.symmetric {
        let mut by_first: Vec<(f64, usize)> = poly.facets.iter().enumerate().map(|(i, f)| (f.normal[0], i)).collect();
        by_first.sort_by(|a, b| a.0.total_cmp(&b.0));
        let eps = 1e-7;
        for f in &poly.facets {
            let target = -f.normal[0];
            let lo = by_first.partition_point(|e| e.0 < target - eps);
            let found = by_first[lo..].iter().take_while(|e| e.0 <= target + eps).any(|&(_, j)| {
                let g = &poly.facets[j];
                g.normal.iter().zip(&f.normal).all(|(a, b)| (a + b).abs() <= eps)
                    && (g.offset - f.offset).abs() <= eps * f.offset.abs().max(1.0)
            });
            if !found {
                d.unmatched_antipodes += 1;
            }
        }
        let mut sorted: Vec<&Vec<f64>> = poly.vertices.iter().collect();
        sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
        for v in &poly.vertices {
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let lo = sorted.partition_point(|w| w[0] < neg[0] - tol);
            if !sorted[lo..].iter().take_while(|w| w[0] <= neg[0] + tol).any(|w| approx_eq_slices(w, &neg, tol)) {
                d.unmatched_vertices += 1;
            }
        }
        let big_n = points.rows() as f64;
        d.facet_cap = Some((2.0 * std::f64::consts::E * big_n / n as f64).powi(n as i32));
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample_matrix, DistributionSpec};

    fn identity_rows(n: usize, scale: f64) -> SampleMatrix {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { scale } else { 0.0 }).collect()).collect();
        SampleMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn square() {
        let pts = SampleMatrix::from_rows(&[[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]).unwrap();
        let sq = convex_hull(&pts).unwrap();
        assert_eq!(sq.facets.len(), 4);
        let mut normals: Vec<(i64, i64)> =
            sq.facets.iter().map(|f| (f.normal[0].round() as i64, f.normal[1].round() as i64)).collect();
        normals.sort();
        assert_eq!(normals, vec![(-1, 0), (0, -1), (0, 1), (1, 0)]);
        for f in &sq.facets {
            assert!((f.offset - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn simplex_combinatorics() {
        for n in 1..=6 {
            let mut rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
            rows.push(vec![0.0; n]);
            let s = convex_hull(&SampleMatrix::from_rows(&rows).unwrap()).unwrap();
            assert_eq!(s.facets.len(), n + 1);
            assert_eq!(s.vertices.len(), n + 1);
        }
    }

    #[test]
    fn cross_polytope() {
        for n in 1..=6 {
            let c = symmetric_hull(&identity_rows(n, 1.0)).unwrap();
            assert_eq!(c.facets.len(), 1 << n);
            assert!(c.symmetric);
            for f in &c.facets {
                assert!((f.offset - 1.0 / (n as f64).sqrt()).abs() < 1e-14);
            }
            let c2 = symmetric_hull(&identity_rows(n, 2.0)).unwrap();
            for f in &c2.facets {
                assert!((f.offset - 2.0 / (n as f64).sqrt()).abs() < 1e-14);
            }
            let diag = validate_polytope(&c, &identity_rows(n, 1.0));
            assert!(diag.is_valid(1e-12), "{diag:?}");
        }
    }

    #[test]
    fn support_function_matches_brute_force() {
        let pts = sample_matrix(DistributionSpec::StandardGaussian, 20, 3, 4).unwrap();
        let hull = convex_hull(&pts).unwrap();
        let dirs = sample_matrix(DistributionSpec::StandardGaussian, 1000, 3, 5).unwrap();
        for u in dirs.iter_rows() {
            let brute = pts.iter_rows().map(|p| dot(p, u)).fold(f64::NEG_INFINITY, f64::max);
            let from_facets = hull
                .facets
                .iter()
                .flat_map(|f| f.vertex_ids.iter())
                .map(|&v| dot(&hull.vertices[v], u))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((brute - from_facets).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_symmetric_hull_pairs_normals() {
        let pts = sample_matrix(DistributionSpec::StandardGaussian, 12, 3, 8).unwrap();
        let t = symmetric_hull(&pts).unwrap();
        let diag = validate_polytope(&t, &pts);
        assert!(diag.is_valid(1e-9), "{diag:?}");
        let pos = t.facets.iter().filter(|f| f.normal[0] > 0.0).count();
        assert_eq!(2 * pos, t.facets.len());
    }

    #[test]
    fn self_consistency_in_several_dimensions() {
        for (n, m, seed) in [(2, 30, 1), (3, 40, 2), (4, 30, 3), (5, 25, 4), (6, 20, 5)] {
            let pts = sample_matrix(DistributionSpec::StandardGaussian, m, n, seed).unwrap();
            let k = convex_hull(&pts).unwrap();
            let diag = validate_polytope(&k, &pts);
            assert!(diag.is_valid(1e-9), "n={n}: {diag:?}");
            let t = symmetric_hull(&pts).unwrap();
            let diag = validate_polytope(&t, &pts);
            assert!(diag.is_valid(1e-9), "n={n}: {diag:?}");
        }
    }

    #[test]
    fn negated_normal_is_reported() {
        let pts = identity_rows(3, 1.0);
        let mut c = symmetric_hull(&pts).unwrap();
        c.facets[0].normal.iter_mut().for_each(|x| *x = -*x);
        c.facets[0].offset = -c.facets[0].offset;
        let diag = validate_polytope(&c, &pts);
        assert!(diag.max_point_violation > 0.5);
        assert!(!diag.is_valid(1e-9));
    }

    #[test]
    fn degenerate_inputs() {
        let flat = SampleMatrix::from_rows(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(convex_hull(&flat), Err(HullError::DegenerateInput(_))));
        let few = SampleMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(convex_hull(&few), Err(HullError::InsufficientPoints { .. })));
        // four coplanar points on the boundary of a tetrahedron-like set
        let cop = SampleMatrix::from_rows(&[
            [0.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
            [0.0, 0.0, 2.0],
            [2.0, 2.0, 0.0],
        ])
        .unwrap();
        assert!(matches!(convex_hull(&cop), Err(HullError::DegenerateInput(_))));
        let tri = convex_hull_with(&cop, &HullOptions::triangulating()).unwrap();
        assert!(validate_polytope(&tri, &cop).is_valid(1e-12));
        let big = sample_matrix(DistributionSpec::StandardGaussian, 20, 11, 1).unwrap();
        assert!(matches!(convex_hull(&big), Err(HullError::DimensionTooHigh { dim: 11, max: 10 })));
    }

    #[test]
    fn facet_budget_is_enforced() {
        let pts = sample_matrix(DistributionSpec::StandardGaussian, 60, 4, 1).unwrap();
        let opts = HullOptions { facet_budget: 20, ..HullOptions::default() };
        assert_eq!(convex_hull_with(&pts, &opts), Err(HullError::FacetBudgetExceeded { budget: 20 }));
    }

    #[test]
    fn triangulated_cube() {
        for n in 2..=5 {
            let verts: Vec<Vec<f64>> = (0..1usize << n)
                .map(|mask| (0..n).map(|j| if mask >> j & 1 == 1 { 1.0 } else { -1.0 }).collect())
                .collect();
            let pts = SampleMatrix::from_rows(&verts).unwrap();
            let cube = convex_hull_with(&pts, &HullOptions::triangulating()).unwrap();
            let diag = validate_polytope(&cube, &pts);
            assert!(diag.max_point_violation <= 1e-12 && diag.unpaired_ridges == 0, "{diag:?}");
            assert!(contains(&cube, &vec![0.0; n]));
            assert!((inradius(&cube, &vec![0.0; n]).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn membership_and_inradius() {
        let verts: Vec<Vec<f64>> =
            (0..8usize).map(|m| (0..3).map(|j| if m >> j & 1 == 1 { 1.0 } else { -1.0 }).collect()).collect();
        let cube = convex_hull_with(&SampleMatrix::from_rows(&verts).unwrap(), &HullOptions::triangulating()).unwrap();
        assert!(contains(&cube, &[0.0, 0.0, 0.0]));
        assert!(!contains(&cube, &[1.01, 0.0, 0.0]));
        for v in &cube.vertices {
            assert!(contains(&cube, v));
        }
        assert!(matches!(inradius(&cube, &[2.0, 0.0, 0.0]), Err(HullError::CenterOutside { .. })));

        for n in 1..=6 {
            let c = symmetric_hull(&identity_rows(n, 1.0)).unwrap();
            let r = inradius(&c, &vec![0.0; n]).unwrap();
            assert!((r - 1.0 / (n as f64).sqrt()).abs() < 1e-14);
        }

        let g = sample_matrix(DistributionSpec::StandardGaussian, 64, 4, 12).unwrap();
        let t = symmetric_hull(&g).unwrap();
        let r = inradius(&t, &[0.0; 4]).unwrap();
        let min_norm = t.vertices.iter().map(|v| norm(v)).fold(f64::INFINITY, f64::min);
        assert!(r > 0.0 && r <= min_norm);
    }

    #[test]
    fn one_dimensional_hulls() {
        let pts = SampleMatrix::from_rows(&[[0.5], [-2.0], [1.5], [0.0]]).unwrap();
        let seg = convex_hull(&pts).unwrap();
        assert_eq!(seg.facets.len(), 2);
        let mut offs: Vec<f64> = seg.facets.iter().map(|f| f.offset).collect();
        offs.sort_by(f64::total_cmp);
        assert_eq!(offs, vec![1.5, 2.0]);
    }

    #[test]
    fn json_shape() {
        let c = symmetric_hull(&identity_rows(2, 1.0)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        for key in ["dim", "vertices", "facets", "symmetric"] {
            assert!(v.get(key).is_some());
        }
        let f = &v["facets"][0];
        for key in ["vertex_ids", "normal", "offset"] {
            assert!(f.get(key).is_some());
        }
        let back: Polytope = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn affine_image_keeps_combinatorics() {
        let pts = sample_matrix(DistributionSpec::StandardGaussian, 15, 3, 2).unwrap();
        let k = convex_hull(&pts).unwrap();
        let a = vec![vec![2.0, 0.5, 0.0], vec![0.0, 1.0, -0.3], vec![0.1, 0.0, -1.5]];
        let img = k.affine_image(&a, &[1.0, -2.0, 0.5]).unwrap();
        let mapped: Vec<Vec<f64>> = pts
            .iter_rows()
            .map(|p| (0..3).map(|i| dot(&a[i], p) + [1.0, -2.0, 0.5][i]).collect())
            .collect();
        let diag = validate_polytope(&img, &SampleMatrix::from_rows(&mapped).unwrap());
        assert!(diag.is_valid(1e-9), "{diag:?}");
    }
}
