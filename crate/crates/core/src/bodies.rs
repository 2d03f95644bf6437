//! Reference bodies with closed-form volumes and moments.

use std::str::FromStr;

use crate::distributions::SampleMatrix;
use crate::hull::{convex_hull, Facet, Polytope};

/// Named bodies addressable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceBody {
    /// `[-1, 1]^n`
    Cube,
    /// `conv{±e_1, ..., ±e_n}`
    CrossPolytope,
    /// Regular simplex with `n + 1` vertices, centered at the origin.
    Simplex,
}

impl ReferenceBody {
    pub fn build(self, n: usize) -> Polytope {
        match self {
            ReferenceBody::Cube => cube(n),
            ReferenceBody::CrossPolytope => cross_polytope(n),
            ReferenceBody::Simplex => regular_simplex(n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ReferenceBody::Cube => "cube",
            ReferenceBody::CrossPolytope => "cross-polytope",
            ReferenceBody::Simplex => "simplex",
        }
    }

    /// Analytic isotropic constant.
    pub fn isotropic_constant(self, n: usize) -> f64 {
        match self {
            ReferenceBody::Cube => 1.0 / 12f64.sqrt(),
            ReferenceBody::Simplex => simplex_isotropic_constant(n),
            ReferenceBody::CrossPolytope => {
                // Cov = 2/((n+1)(n+2)) I, vol = 2^n / n!
                let var = 2.0 / ((n + 1) * (n + 2)) as f64;
                let vol = 2f64.powi(n as i32) / crate::linalg::factorial(n);
                (var / vol.powf(2.0 / n as f64)).sqrt()
            }
        }
    }
}

impl FromStr for ReferenceBody {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cube" => Ok(ReferenceBody::Cube),
            "cross-polytope" | "cross" => Ok(ReferenceBody::CrossPolytope),
            "simplex" => Ok(ReferenceBody::Simplex),
            other => Err(format!("unknown body `{other}` (expected cube, cross-polytope or simplex)")),
        }
    }
}

/// `L^2 = (n!)^{2/n} / ((n + 1)^{(n+1)/n} (n + 2))` for any n-simplex.
pub fn simplex_isotropic_constant(n: usize) -> f64 {
    let nf = n as f64;
    let l2 = crate::linalg::factorial(n).powf(2.0 / nf) / ((nf + 1.0).powf((nf + 1.0) / nf) * (nf + 2.0));
    l2.sqrt()
}

pub fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// `[-1, 1]^n`, each square facet split into `(n-1)!` Kuhn simplices.
pub fn cube(n: usize) -> Polytope {
    assert!((1..=16).contains(&n), "cube dimension out of range");
    let vertices: Vec<Vec<f64>> = (0..1usize << n)
        .map(|mask| (0..n).map(|j| if mask >> j & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect();
    let mut facets = Vec::new();
    for axis in 0..n {
        for &side in &[-1.0f64, 1.0] {
            let fixed = if side > 0.0 { 1usize << axis } else { 0 };
            let free: Vec<usize> = (0..n).filter(|&j| j != axis).collect();
            let mut normal = vec![0.0; n];
            normal[axis] = side;
            for perm in permutations(&free) {
                let mut mask = fixed;
                let mut ids = vec![mask];
                for &j in &perm {
                    mask |= 1 << j;
                    ids.push(mask);
                }
                ids.sort_unstable();
                facets.push(Facet { vertex_ids: ids, normal: normal.clone(), offset: 1.0 });
            }
        }
    }
    Polytope { dim: n, vertices, facets, symmetric: true }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// `conv{±e_1, ..., ±e_n}` with its `2^n` simplicial facets.
pub fn cross_polytope(n: usize) -> Polytope {
    assert!((1..=20).contains(&n), "cross-polytope dimension out of range");
    let mut vertices = Vec::with_capacity(2 * n);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = s;
            vertices.push(v);
        }
    }
    let inv = 1.0 / (n as f64).sqrt();
    let facets = (0..1usize << n)
        .map(|signs| {
            let neg = |i: usize| signs >> i & 1 == 1;
            Facet {
                vertex_ids: (0..n).map(|i| 2 * i + usize::from(neg(i))).collect(),
                normal: (0..n).map(|i| if neg(i) { -inv } else { inv }).collect(),
                offset: inv,
            }
        })
        .collect();
    Polytope { dim: n, vertices, facets, symmetric: true }
}

/// Regular simplex: the centered standard basis of `R^{n+1}` written in an
/// orthonormal basis of the hyperplane `sum x_i = 0`.
pub fn regular_simplex(n: usize) -> Polytope {
    assert!(n >= 1);
    // Helmert basis: u_k = (1, ..., 1, -k, 0, ...) / sqrt(k (k + 1)), k = 1..n
    let helmert = |k: usize, i: usize| -> f64 {
        let s = ((k * (k + 1)) as f64).sqrt();
        if i < k {
            1.0 / s
        } else if i == k {
            -(k as f64) / s
        } else {
            0.0
        }
    };
    let rows: Vec<Vec<f64>> = (0..=n).map(|i| (1..=n).map(|k| helmert(k, i)).collect()).collect();
    let pts = SampleMatrix::from_rows(&rows).expect("well-formed");
    convex_hull(&pts).expect("simplex vertices are affinely independent")
}
