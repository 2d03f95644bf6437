//! Small dense kernels shared by the geometry modules.

use nalgebra::DMatrix;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for a vector of sums.
#[derive(Debug, Clone)]
pub struct CompensatedVec(Vec<CompensatedSum>);

impl CompensatedVec {
    pub fn zeros(len: usize) -> Self {
        CompensatedVec(vec![CompensatedSum::default(); len])
    }

    #[inline]
    pub fn add_scaled(&mut self, scale: f64, v: &[f64]) {
        for (acc, x) in self.0.iter_mut().zip(v) {
            acc.add(scale * x);
        }
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, x: f64) {
        self.0[i].add(x);
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(CompensatedSum::value).collect()
    }
}

/// Householder QR of an `rows x cols` column-major matrix (`cols <= rows`).
///
/// Keeps the reflectors so that the columns of the full orthogonal factor,
/// in particular the ones spanning the orthogonal complement of the input
/// columns, can be recovered.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    rows: usize,
    cols: usize,
    reflectors: Vec<f64>,
    r_diag: Vec<f64>,
}

impl HouseholderQr {
    /// Factorizes `a` (column-major, consumed as workspace).
    pub fn new(mut a: Vec<f64>, rows: usize, cols: usize) -> Self {
        assert!(cols <= rows && a.len() == rows * cols);
        let mut reflectors = vec![0.0; rows * cols];
        let mut r_diag = vec![0.0; cols];
        for j in 0..cols {
            let col = j * rows;
            let xnorm = a[col + j..col + rows].iter().map(|x| x * x).sum::<f64>().sqrt();
            if xnorm == 0.0 {
                // Zero column: identity reflector, R_jj = 0.
                continue;
            }
            let alpha = if a[col + j] > 0.0 { -xnorm } else { xnorm };
            let v = &mut reflectors[col..col + rows];
            v[j..].copy_from_slice(&a[col + j..col + rows]);
            v[j] -= alpha;
            let vnorm = v[j..].iter().map(|x| x * x).sum::<f64>().sqrt();
            v[j..].iter_mut().for_each(|x| *x /= vnorm);
            r_diag[j] = alpha;
            for k in j + 1..cols {
                let ck = k * rows;
                let proj: f64 = (j..rows).map(|i| v[i] * a[ck + i]).sum();
                for i in j..rows {
                    a[ck + i] -= 2.0 * proj * v[i];
                }
            }
        }
        HouseholderQr { rows, cols, reflectors, r_diag }
    }

    /// Diagonal of R; `prod |R_jj| = sqrt(det(A^T A))`.
    pub fn r_diag(&self) -> &[f64] {
        &self.r_diag
    }

    /// `sqrt(det(A^T A))`.
    pub fn gram_sqrt_det(&self) -> f64 {
        self.r_diag.iter().map(|r| r.abs()).product()
    }

    /// Column `index` of the full orthogonal factor Q.
    pub fn q_column(&self, index: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        y[index] = 1.0;
        for j in (0..self.cols).rev() {
            let v = &self.reflectors[j * self.rows..(j + 1) * self.rows];
            let proj: f64 = (j..self.rows).map(|i| v[i] * y[i]).sum();
            for i in j..self.rows {
                y[i] -= 2.0 * proj * v[i];
            }
        }
        y
    }

    /// Unit vector orthogonal to every input column (requires `cols < rows`).
    pub fn normal(&self) -> Vec<f64> {
        self.q_column(self.rows - 1)
    }
}

/// Symmetric part of `m`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Factorial as f64.
pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Determinant by LU with partial pivoting.
pub fn determinant(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}
