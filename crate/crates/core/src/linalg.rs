//! Small dense linear algebra for design matrices and their Fisher information.
//!
//! Everything here is sized for the problems at hand: a handful of parameters
//! (at most 16 for the full Choquet design) and a few dozen observations.
//! Least squares goes through the normal equations `XᵀX θ = XᵀS`; for the
//! matrices involved the conditioning loss of squaring X is acceptable, but it
//! is the reason singularity is judged relative to the scale of `XᵀX`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest square dimension accepted by the factorizations.
pub const MAX_DIM: usize = 32;

/// Relative determinant below which a matrix is declared singular.
pub const SINGULARITY_RATIO: f64 = 1e-12;

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension { expected: rows * cols, found: data.len() });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension { expected: cols, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
    }

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

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension { expected: self.cols, found: other.rows });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `Xᵀ v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::Dimension { expected: self.rows, found: v.len() });
        }
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(self.row(i)) {
                *o += x * vi;
            }
        }
        Ok(out)
    }

    /// The Gram matrix `XᵀX` (Fisher information of a linear design).
    pub fn gram(&self) -> Matrix {
        let q = self.cols;
        let mut g = Matrix::zeros(q, q);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..q {
                for b in a..q {
                    g.data[a * q + b] += r[a] * r[b];
                }
            }
        }
        for a in 0..q {
            for b in 0..a {
                g.data[a * q + b] = g.data[b * q + a];
            }
        }
        g
    }

    /// `xᵀ M y` for a square matrix.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.rows).map(|i| x[i] * dot(self.row(i), y)).sum()
    }

    pub fn determinant(&self) -> Result<f64> {
        Ok(Lu::factor(self)?.determinant())
    }

    /// Inverse, refusing matrices that are singular relative to their scale.
    pub fn inverse(&self) -> Result<Matrix> {
        let lu = Lu::factor(self)?;
        let det = lu.determinant();
        if is_negligible(det, self) {
            return Err(Error::Singular { det });
        }
        let n = self.rows;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            for (i, v) in lu.solve(&e).into_iter().enumerate() {
                inv.data[i * n + j] = v;
            }
        }
        Ok(inv)
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.rows {
            return Err(Error::Dimension { expected: self.rows, found: b.len() });
        }
        let lu = Lu::factor(self)?;
        let det = lu.determinant();
        if is_negligible(det, self) {
            return Err(Error::Singular { det });
        }
        Ok(lu.solve(b))
    }

    /// Hadamard-type bound on `|det M|` used to make singularity scale aware.
    ///
    /// For symmetric matrices with a positive diagonal (every `XᵀX`) this is the
    /// product of the diagonal; otherwise the product of the row norms.
    pub fn determinant_scale(&self) -> f64 {
        let n = self.rows;
        let symmetric_pd_diag =
            (0..n).all(|i| self.get(i, i) > 0.0) && (0..n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)));
        if symmetric_pd_diag {
            (0..n).map(|i| self.get(i, i)).product()
        } else {
            (0..n).map(|i| libm::sqrt(dot(self.row(i), self.row(i)))).product()
        }
    }

    /// True when `|det M|` is below [`SINGULARITY_RATIO`] times its scale.
    pub fn is_singular(&self) -> Result<bool> {
        let det = self.determinant()?;
        Ok(is_negligible(det, self))
    }
}

fn is_negligible(det: f64, m: &Matrix) -> bool {
    let scale = m.determinant_scale();
    det == 0.0 || !det.is_finite() || libm::fabs(det) < SINGULARITY_RATIO * scale
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least-squares solution of `X θ ≈ S` via the normal equations.
pub fn solve_normal(x: &Matrix, s: &[f64]) -> Result<Vec<f64>> {
    if s.len() != x.rows() {
        return Err(Error::Dimension { expected: x.rows(), found: s.len() });
    }
    if x.rows() < x.cols() {
        return Err(Error::Underdetermined { rows: x.rows(), columns: x.cols() });
    }
    x.gram().solve(&x.tr_mul_vec(s)?)
}

/// LU factorization with partial pivoting, `P M = L U` packed in one buffer.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
    // exact zero pivot: the matrix is singular to working precision
    degenerate: bool,
}

impl Lu {
    fn factor(m: &Matrix) -> Result<Lu> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
        }
        let n = m.rows;
        if n > MAX_DIM {
            return Err(Error::TooLarge(n));
        }
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut degenerate = false;
        for k in 0..n {
            let p =
                (k..n).max_by(|&a, &b| libm::fabs(lu[a * n + k]).total_cmp(&libm::fabs(lu[b * n + k]))).unwrap_or(k);
            if lu[p * n + k] == 0.0 {
                degenerate = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(p * n + j, k * n + j);
                }
                perm.swap(p, k);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Lu { n, lu, perm, sign, degenerate })
    }

    fn determinant(&self) -> f64 {
        if self.degenerate {
            return 0.0;
        }
        (0..self.n).map(|i| self.lu[i * self.n + i]).product::<f64>() * self.sign
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }
}
