use crate::error::{GramError, Result};
use crate::scalar::Real;

use super::{Matrix, SymMat};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition with eigenvalues in descending order and the matching
/// orthonormal eigenvectors as columns of `vectors`.
#[derive(Clone, Debug)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> Eigen<T> {
    pub fn vector(&self, k: usize) -> Vec<T> {
        self.vectors.column(k)
    }
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
pub fn eigh<T: Real>(a: &SymMat<T>) -> Result<Eigen<T>> {
    let n = a.size();
    let mut m: Vec<T> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            m.push(a[(i, j)]);
        }
    }
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let two = T::lit(2.0);
    let frob = m.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt();
    let tiny = T::eps() * frob / T::lit(n.max(1) as f64);
    let mut converged = n < 2 || frob == T::zero();
    for _sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= tiny {
                    m[p * n + q] = T::zero();
                    m[q * n + p] = T::zero();
                    continue;
                }
                rotated = true;
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (two * apq);
                let t = if theta.is_infinite() {
                    T::zero()
                } else {
                    let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                m[p * n + q] = T::zero();
                m[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(GramError::ConvergenceFailure { what: "Jacobi eigen", iterations: MAX_SWEEPS });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].partial_cmp(&m[i * n + i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
    Ok(Eigen { values, vectors })
}

/// Number of eigenvalues with `|λ| > tol · max|λ|`.
pub fn rank_tol<T: Real>(a: &SymMat<T>, tol: T) -> Result<usize> {
    let e = eigh(a)?;
    let max = e.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if max == T::zero() {
        return Ok(0);
    }
    Ok(e.values.iter().filter(|v| v.abs() > tol * max).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_sorted() {
        let e = eigh(&SymMat::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn swap_matrix() {
        let e = eigh(&SymMat::<f64>::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_two_example() {
        let a = SymMat::<f64>::from_rows(&[vec![-5.0, 3.0, 0.0], vec![3.0, -2.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
        let e = eigh(&a).unwrap();
        assert_eq!(e.values.iter().filter(|v| v.abs() < 1e-14).count(), 1);
        assert_eq!(rank_tol(&a, 1e-8).unwrap(), 2);
        assert_eq!(rank_tol(&SymMat::<f64>::zeros(4), 1e-8).unwrap(), 0);
    }

    #[test]
    fn single_precision() {
        let a = SymMat::from_rows(&[vec![2.0f32, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = eigh(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-6);
        assert!((e.values[1] - 1.0).abs() < 1e-6);
    }
}
