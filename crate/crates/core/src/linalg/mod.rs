//! Dense symmetric matrices, Jacobi eigen/SVD, polynomial roots and exact
//! rational elimination.

mod eigen;
mod rational;
mod roots;
mod svd;

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{GramError, Result};
use crate::scalar::Scalar;

pub use eigen::{eigh, rank_tol, Eigen};
pub use rational::{rational_ldl, rational_solve, Ldl, RationalMat, SolveOutcome};
pub use roots::poly_roots;
pub use svd::{column_space, nullspace, numeric_rank, singular_values, Svd};

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(GramError::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend(r.iter().cloned());
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(GramError::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out: Matrix<T> = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out[(i, j)].clone() + a.clone() * other[(k, j)].clone();
                    out[(i, j)] = v;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        if self.cols != v.len() {
            return Err(GramError::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r).iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Symmetric matrix stored as its upper triangle, so `a[(i,j)] == a[(j,i)]`
/// holds by construction.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for SymMat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMat {} [", self.n)?;
        for i in 0..self.n {
            let row: Vec<&T> = (0..self.n).map(|j| &self[(i, j)]).collect();
            writeln!(f, "  {:?}", row)?;
        }
        write!(f, "]")
    }
}

#[inline]
fn packed(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl<T> SymMat<T> {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Builds from a function evaluated on the upper triangle (`i <= j`).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                data.push(f(i, j));
            }
        }
        SymMat { n, data }
    }

    /// Upper-triangle entries in row order; the coordinates of Sym² used by the Gram map.
    pub fn packed(&self) -> &[T] {
        &self.data
    }

    pub fn from_packed(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * (n + 1) / 2 {
            return Err(GramError::DimensionMismatch { expected: n * (n + 1) / 2, found: data.len() });
        }
        Ok(SymMat { n, data })
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> SymMat<U> {
        SymMat { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = packed(self.n, i, j);
        self.data[k] = v;
    }
}

impl<T: Scalar> SymMat<T> {
    pub fn zeros(n: usize) -> Self {
        SymMat::from_fn(n, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        SymMat::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(d: &[T]) -> Self {
        SymMat::from_fn(d.len(), |i, j| if i == j { d[i].clone() } else { T::zero() })
    }

    /// Rejects input that is not exactly symmetric.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(GramError::DimensionMismatch { expected: n, found: r.len() });
            }
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(GramError::InvalidInput(format!("matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(SymMat::from_fn(n, |i, j| rows[i][j].clone()))
    }

    pub fn from_dense(m: &Matrix<T>) -> Result<Self> {
        SymMat::from_rows(&m.to_rows())
    }

    /// `v vᵀ`.
    pub fn outer(v: &[T]) -> Self {
        SymMat::from_fn(v.len(), |i, j| v[i].clone() * v[j].clone())
    }

    /// `(u vᵀ + v uᵀ) / 2`.
    pub fn sym_outer(u: &[T], v: &[T]) -> Self {
        let half = T::from_ratio(1, 2);
        SymMat::from_fn(u.len(), |i, j| {
            half.clone() * (u[i].clone() * v[j].clone() + v[i].clone() * u[j].clone())
        })
    }

    pub fn to_dense(&self) -> Matrix<T> {
        Matrix::from_fn(self.n, self.n, |i, j| self[(i, j)].clone())
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.to_dense().to_rows()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        assert_eq!(self.n, other.n, "symmetric matrix size mismatch");
        SymMat { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|a| a.clone() * s.clone())
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: &T, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() + s.clone() * b.clone())
    }

    /// Sum of `coeffs[i] * mats[i]`.
    pub fn combination(coeffs: &[T], mats: &[SymMat<T>], n: usize) -> Self {
        let mut out = SymMat::zeros(n);
        for (c, m) in coeffs.iter().zip(mats) {
            if !c.is_zero() {
                out = out.axpy(c, m);
            }
        }
        out
    }

    /// Frobenius pairing `tr(AB)`.
    pub fn trace_dot(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n, "symmetric matrix size mismatch");
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                let p = self[(i, j)].clone() * other[(i, j)].clone();
                acc = if i == j { acc + p } else { acc + p.clone() + p };
            }
        }
        acc
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    /// `B · self · Bᵀ` for a dense `B` with `self.size()` columns.
    pub fn congruence(&self, b: &Matrix<T>) -> SymMat<T> {
        assert_eq!(b.cols(), self.n);
        let bs = b.matmul(&self.to_dense()).expect("sizes checked");
        SymMat::from_fn(b.rows(), |i, j| {
            (0..self.n).fold(T::zero(), |acc, k| acc + bs[(i, k)].clone() * b[(j, k)].clone())
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.trace_dot(self).to_f64().max(0.0).sqrt()
    }
}

impl<T> Index<(usize, usize)> for SymMat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.n && j < self.n);
        &self.data[packed(self.n, i, j)]
    }
}

/// Determinant of a 3x3 symmetric matrix.
pub fn det3<T: Scalar>(a: &SymMat<T>) -> T {
    assert_eq!(a.size(), 3, "det3 needs a 3x3 matrix");
    let g = |i, j| a[(i, j)].clone();
    g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(1, 2)) - g(0, 1) * (g(0, 1) * g(2, 2) - g(1, 2) * g(0, 2))
        + g(0, 2) * (g(0, 1) * g(1, 2) - g(1, 1) * g(0, 2))
}

/// Adjugate of a 3x3 symmetric matrix; defined for singular input.
pub fn adjugate<T: Scalar>(a: &SymMat<T>) -> SymMat<T> {
    assert_eq!(a.size(), 3, "adjugate needs a 3x3 matrix");
    let g = |i, j| a[(i, j)].clone();
    SymMat::from_fn(3, |i, j| match (i, j) {
        (0, 0) => g(1, 1) * g(2, 2) - g(1, 2) * g(1, 2),
        (0, 1) => g(0, 2) * g(1, 2) - g(0, 1) * g(2, 2),
        (0, 2) => g(0, 1) * g(1, 2) - g(0, 2) * g(1, 1),
        (1, 1) => g(0, 0) * g(2, 2) - g(0, 2) * g(0, 2),
        (1, 2) => g(0, 1) * g(0, 2) - g(0, 0) * g(1, 2),
        (2, 2) => g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1),
        _ => unreachable!(),
    })
}

/// Cholesky factor `L` (row-major lower triangle) of a positive definite matrix,
/// or `None` when a pivot is not positive.
pub fn cholesky(a: &SymMat<f64>) -> Option<Matrix<f64>> {
    let n = a.size();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut s = a[(j, j)];
        for k in 0..j {
            s -= l[(j, k)] * l[(j, k)];
        }
        if !(s > 0.0) {
            return None;
        }
        let d = s.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solves a small symmetric positive definite system.
pub fn solve_spd(a: &SymMat<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let l = cholesky(a)?;
    let n = a.size();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[(k, i)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    Some(y)
}

/// Gaussian elimination with partial pivoting for a small dense system.
pub fn solve_dense(a: &Matrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return None;
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = a.data.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))?;
        if m[(p, k)].abs() <= 1e-14 * scale {
            return None;
        }
        if p != k {
            for c in 0..n {
                let t = m[(k, c)];
                m[(k, c)] = m[(p, c)];
                m[(p, c)] = t;
            }
            x.swap(k, p);
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            if f != 0.0 {
                for c in k..n {
                    m[(i, c)] -= f * m[(k, c)];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for i in (0..n).rev() {
        for c in i + 1..n {
            x[i] -= m[(i, c)] * x[c];
        }
        x[i] /= m[(i, i)];
    }
    Some(x)
}
