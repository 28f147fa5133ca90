use crate::error::{GramError, Result};
use crate::scalar::Real;

use super::Matrix;

const MAX_SWEEPS: usize = 80;

/// Singular values (descending) and right singular vectors (columns of `v`).
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub values: Vec<T>,
    pub v: Matrix<T>,
}

/// One-sided (Hestenes) Jacobi SVD of an m×n matrix.
pub fn singular_values<T: Real>(a: &Matrix<T>) -> Result<Svd<T>> {
    let (m, n) = (a.rows(), a.cols());
    // columns of `u` are rotated until mutually orthogonal; `v` accumulates the rotations
    let mut u: Vec<Vec<T>> = (0..n).map(|c| a.column(c)).collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|c| (0..n).map(|r| if r == c { T::one() } else { T::zero() }).collect())
        .collect();
    let tol = T::eps() * T::lit(m.max(1) as f64).sqrt();
    let frob2 = u.iter().flatten().fold(T::zero(), |s, &x| s + x * x);
    // columns at rounding level are treated as zero and never rotated
    let negligible = T::eps() * T::eps() * frob2;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for k in 0..m {
                    alpha += u[p][k] * u[p][k];
                    beta += u[q][k] * u[q][k];
                    gamma += u[p][k] * u[q][k];
                }
                if gamma == T::zero() || alpha.min(beta) <= negligible || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = {
                    let t = T::one() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    if zeta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let (x, y) = (u[p][k], u[q][k]);
                    u[p][k] = c * x - s * y;
                    u[q][k] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (v[p][k], v[q][k]);
                    v[p][k] = c * x - s * y;
                    v[q][k] = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(GramError::ConvergenceFailure { what: "Jacobi SVD", iterations: MAX_SWEEPS });
    }
    let norms: Vec<T> = u.iter().map(|col| col.iter().fold(T::zero(), |s, &x| s + x * x).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| norms[i]).collect();
    let v = Matrix::from_fn(n, n, |r, c| v[order[c]][r]);
    Ok(Svd { values, v })
}

fn split_index<T: Real>(values: &[T], rel_tol: T) -> usize {
    let max = values.first().copied().unwrap_or(T::zero());
    if max == T::zero() {
        return 0;
    }
    values.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numeric_rank<T: Real>(a: &Matrix<T>, rel_tol: T) -> Result<usize> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0);
    }
    // the one-sided sweep is cheaper on the side with fewer columns
    let svd = if a.cols() > a.rows() { singular_values(&a.transpose())? } else { singular_values(a)? };
    Ok(split_index(&svd.values, rel_tol))
}

/// Orthonormal basis (as vectors of length `cols`) of the kernel of `a`.
pub fn nullspace<T: Real>(a: &Matrix<T>, rel_tol: T) -> Result<Vec<Vec<T>>> {
    let n = a.cols();
    if a.rows() == 0 {
        return Ok((0..n).map(|c| (0..n).map(|r| if r == c { T::one() } else { T::zero() }).collect()).collect());
    }
    let svd = singular_values(a)?;
    let r = split_index(&svd.values, rel_tol);
    Ok((r..n).map(|c| svd.v.column(c)).collect())
}

/// Orthonormal basis of the span of the given vectors (rows of the returned list).
pub fn column_space<T: Real>(vectors: &[Vec<T>], rel_tol: T) -> Result<Vec<Vec<T>>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    // span of the vectors = row space of the matrix whose rows they are
    let a = Matrix::from_rows(vectors)?;
    let svd = singular_values(&a)?;
    let r = split_index(&svd.values, rel_tol);
    Ok((0..r).map(|c| svd.v.column(c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_outer_sum() {
        let a = Matrix::<f64>::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![1.0, 0.0, 1.0]]).unwrap();
        assert_eq!(numeric_rank(&a, 1e-8).unwrap(), 2);
        let ns = nullspace(&a, 1e-8).unwrap();
        assert_eq!(ns.len(), 1);
        let r = a.matvec(&ns[0]).unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn wide_matrix() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(numeric_rank(&a, 1e-8).unwrap(), 1);
        assert_eq!(nullspace(&a, 1e-8).unwrap().len(), 3);
    }

    #[test]
    fn span_basis_is_orthonormal() {
        let vs = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 1.0, 1.0]];
        let b = column_space(&vs, 1e-8).unwrap();
        assert_eq!(b.len(), 2);
        for i in 0..2 {
            for j in 0..2 {
                let d: f64 = b[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
