//! Small dense linear algebra for desk-scale dimensions (d <= ~50).
//!
//! Everything is hand-rolled over row-major `Vec<f64>`: the kernels only
//! ever see (d+1)-sized systems, so a general BLAS dependency would be
//! dead weight in a `no_std` crate.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    /// Diagonal matrix with the given entries.
    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = entries[i];
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `self * v` for a vector.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            out[i] = math::dot(&self.data[i * self.cols..(i + 1) * self.cols], v);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0;
        for &x in &self.data {
            let a = math::abs(x);
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Solve `a x = b` in place by Gaussian elimination with partial pivoting.
///
/// `a` is consumed as scratch. Returns `Err` when a pivot falls below
/// `tiny` relative to the matrix scale.
pub fn solve(mut a: Matrix, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let scale = a.max_abs().max(1e-300);
    let tiny = 1e-13 * scale;

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = math::abs(a.get(col, col));
        for r in (col + 1)..n {
            let v = math::abs(a.get(r, col));
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val < tiny {
            return Err(Error::Reduction(alloc::format!(
                "singular system (pivot {pivot_val:.3e} at column {col})"
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = a.get(col, j);
                a.set(col, j, a.get(pivot_row, j));
                a.set(pivot_row, j, tmp);
            }
            b.swap(col, pivot_row);
        }
        let inv = 1.0 / a.get(col, col);
        for r in (col + 1)..n {
            let f = a.get(r, col) * inv;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = a.get(r, j) - f * a.get(col, j);
                a.set(r, j, v);
            }
            b[r] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut v = b[col];
        for j in (col + 1)..n {
            v -= a.get(col, j) * b[j];
        }
        b[col] = v / a.get(col, col);
    }
    Ok(b)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as matrix
/// columns, eigenvalues ascending.
pub fn sym_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    let mut m = a.clone();
    let mut v = Matrix::identity(n);

    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m.get(i, j) * m.get(i, j);
            }
        }
        if off < 1e-30 * (1.0 + m.max_abs() * m.max_abs()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if math::abs(apq) < 1e-300 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + math::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + math::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    let mut sorted_vecs = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            sorted_vecs.set(k, new_col, v.get(k, old_col));
        }
    }
    (sorted_vals, sorted_vecs)
}

/// A nonzero vector `nu` with `a nu = 0`, found by Householder QR with
/// column pivoting. Requires strictly more columns than the numerical rank.
pub fn null_vector(a: &Matrix) -> Result<Vec<f64>> {
    let rows = a.rows();
    let cols = a.cols();
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let scale = a.max_abs().max(1e-300);
    let tol = 1e-12 * scale;

    let mut col_norms: Vec<f64> = (0..cols)
        .map(|j| {
            let mut s = 0.0;
            for i in 0..rows {
                s += r.get(i, j) * r.get(i, j);
            }
            s
        })
        .collect();

    let mut rank = 0;
    for k in 0..rows.min(cols) {
        // Column pivot: largest remaining norm, ties to the lowest index.
        let mut best = k;
        for j in (k + 1)..cols {
            if col_norms[j] > col_norms[best] {
                best = j;
            }
        }
        if math::sqrt(col_norms[best].max(0.0)) <= tol {
            break;
        }
        if best != k {
            for i in 0..rows {
                let tmp = r.get(i, k);
                r.set(i, k, r.get(i, best));
                r.set(i, best, tmp);
            }
            perm.swap(k, best);
            col_norms.swap(k, best);
        }
        // Householder reflector annihilating below the diagonal of column k.
        let mut alpha = 0.0;
        for i in k..rows {
            alpha += r.get(i, k) * r.get(i, k);
        }
        let alpha = math::sqrt(alpha);
        if alpha <= tol {
            break;
        }
        let sign = if r.get(k, k) >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = (k..rows).map(|i| r.get(i, k)).collect();
        v[0] += sign * alpha;
        let vnorm2 = v.iter().map(|x| x * x).sum::<f64>();
        if vnorm2 > 0.0 {
            for j in k..cols {
                let mut proj = 0.0;
                for (idx, i) in (k..rows).enumerate() {
                    proj += v[idx] * r.get(i, j);
                }
                let f = 2.0 * proj / vnorm2;
                for (idx, i) in (k..rows).enumerate() {
                    let val = r.get(i, j) - f * v[idx];
                    r.set(i, j, val);
                }
            }
        }
        rank = k + 1;
        for j in (k + 1)..cols {
            col_norms[j] = 0.0;
            for i in (k + 1)..rows {
                col_norms[j] += r.get(i, j) * r.get(i, j);
            }
        }
    }

    if rank >= cols {
        return Err(Error::Reduction(alloc::string::String::from(
            "matrix has full column rank; no null vector",
        )));
    }

    // Express the first non-basic pivoted column in terms of the basic ones:
    // R[0..rank, 0..rank] y = R[0..rank, rank]; nu = (-y, 1, 0, ...) in
    // pivoted order. Retry with later columns if back-substitution fails.
    for free in rank..cols {
        let mut y = vec![0.0; rank];
        let mut ok = true;
        for i in (0..rank).rev() {
            let mut s = r.get(i, free);
            for j in (i + 1)..rank {
                s -= r.get(i, j) * y[j];
            }
            let diag = r.get(i, i);
            if math::abs(diag) <= tol {
                ok = false;
                break;
            }
            y[i] = s / diag;
        }
        if !ok {
            continue;
        }
        let mut nu = vec![0.0; cols];
        for i in 0..rank {
            nu[perm[i]] = -y[i];
        }
        nu[perm[free]] = 1.0;
        if nu.iter().all(|x| x.is_finite()) {
            return Ok(nu);
        }
    }
    Err(Error::Reduction(alloc::string::String::from(
        "elimination step numerically singular after pivot retries",
    )))
}
