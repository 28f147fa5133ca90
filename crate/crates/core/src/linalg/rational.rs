use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{GramError, Result};

use super::Matrix;

/// Dense matrix of arbitrary-precision rationals.
pub type RationalMat = Matrix<BigRational>;

/// Result of an exact linear solve `A x = b`.
#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome {
    Solution { particular: Vec<BigRational>, nullspace: Vec<Vec<BigRational>> },
    Inconsistent,
}

/// Clears denominators of a rational row, giving an integer row with the same solution set.
fn integer_row(row: &[BigRational]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
}

/// Fraction-free (Bareiss) forward elimination in place; returns the pivot columns.
fn bareiss(a: &mut [Vec<BigInt>], ncols: usize) -> Vec<usize> {
    let m = a.len();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        for i in r + 1..m {
            for j in c + 1..a[i].len() {
                let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                debug_assert!((&v % &prev).is_zero(), "Bareiss division must be exact");
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact solution of `A x = b`: one particular solution plus a nullspace basis,
/// or an inconsistency report.
pub fn rational_solve(a: &RationalMat, b: &[BigRational]) -> Result<SolveOutcome> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(GramError::DimensionMismatch { expected: m, found: b.len() });
    }
    let mut aug: Vec<Vec<BigInt>> = (0..m)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.push(b[i].clone());
            integer_row(&row)
        })
        .collect();
    let pivots = bareiss(&mut aug, n);
    let rank = pivots.len();
    if aug[rank..].iter().any(|row| !row[n].is_zero()) {
        return Ok(SolveOutcome::Inconsistent);
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    // back substitution over the rationals on the echelon form
    let solve_with = |rhs_col: bool, free_values: &[(usize, BigRational)]| -> Vec<BigRational> {
        let mut x = vec![BigRational::zero(); n];
        for (c, v) in free_values {
            x[*c] = v.clone();
        }
        for k in (0..rank).rev() {
            let row = &aug[k];
            let pc = pivots[k];
            let mut s = if rhs_col { BigRational::from_integer(row[n].clone()) } else { BigRational::zero() };
            for j in pc + 1..n {
                if !row[j].is_zero() && !x[j].is_zero() {
                    s -= BigRational::from_integer(row[j].clone()) * &x[j];
                }
            }
            x[pc] = s / BigRational::from_integer(row[pc].clone());
        }
        x
    };
    let particular = solve_with(true, &[]);
    let nullspace = free.iter().map(|&f| solve_with(false, &[(f, BigRational::one())])).collect();
    Ok(SolveOutcome::Solution { particular, nullspace })
}

/// Exact `P A Pᵀ = L D Lᵀ` with symmetric pivoting; `perm[i]` is the original
/// index placed at position `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ldl {
    pub perm: Vec<usize>,
    pub l: RationalMat,
    pub d: Vec<BigRational>,
}

impl Ldl {
    pub fn rank(&self) -> usize {
        self.d.iter().filter(|x| !x.is_zero()).count()
    }

    /// Rebuilds the original (unpermuted) matrix from the factors.
    pub fn reconstruct(&self) -> RationalMat {
        let n = self.d.len();
        let mut out = Matrix::from_fn(n, n, |_, _| BigRational::zero());
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for k in 0..=i.min(j) {
                    if !self.d[k].is_zero() {
                        s += &self.l[(i, k)] * &self.d[k] * &self.l[(j, k)];
                    }
                }
                out[(self.perm[i], self.perm[j])] = s;
            }
        }
        out
    }
}

/// Exact LDLᵀ of a symmetric positive semidefinite rational matrix.
pub fn rational_ldl(a: &RationalMat) -> Result<Ldl> {
    let n = a.rows();
    if a.cols() != n {
        return Err(GramError::DimensionMismatch { expected: n, found: a.cols() });
    }
    for i in 0..n {
        for j in 0..i {
            if a[(i, j)] != a[(j, i)] {
                return Err(GramError::InvalidInput("rational_ldl needs a symmetric matrix".into()));
            }
        }
    }
    let mut s = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = Matrix::from_fn(n, n, |i, j| if i == j { BigRational::one() } else { BigRational::zero() });
    let mut d = vec![BigRational::zero(); n];
    for k in 0..n {
        if let Some(p) = (k..n).find(|&i| s[(i, i)].is_negative()) {
            return Err(GramError::NotPsd { step: p });
        }
        let Some(p) = (k..n).find(|&i| !s[(i, i)].is_zero()) else {
            // remaining diagonal is zero: a psd remainder must vanish entirely
            for i in k..n {
                for j in k..n {
                    if !s[(i, j)].is_zero() {
                        return Err(GramError::NotPsd { step: k });
                    }
                }
            }
            break;
        };
        if p != k {
            for c in 0..n {
                let t = s[(k, c)].clone();
                s[(k, c)] = s[(p, c)].clone();
                s[(p, c)] = t;
            }
            for r in 0..n {
                let t = s[(r, k)].clone();
                s[(r, k)] = s[(r, p)].clone();
                s[(r, p)] = t;
            }
            for c in 0..k {
                let t = l[(k, c)].clone();
                l[(k, c)] = l[(p, c)].clone();
                l[(p, c)] = t;
            }
            perm.swap(k, p);
        }
        let pivot = s[(k, k)].clone();
        for i in k + 1..n {
            l[(i, k)] = &s[(i, k)] / &pivot;
        }
        for i in k + 1..n {
            if l[(i, k)].is_zero() {
                continue;
            }
            for j in k + 1..n {
                let v = &s[(i, j)] - &l[(i, k)] * &s[(k, j)];
                s[(i, j)] = v;
            }
        }
        for i in k + 1..n {
            s[(i, k)] = BigRational::zero();
            s[(k, i)] = BigRational::zero();
        }
        d[k] = pivot;
    }
    Ok(Ldl { perm, l, d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn mat(rows: &[&[i64]]) -> RationalMat {
        Matrix::from_rows(&rows.iter().map(|r| r.iter().map(|&v| q(v, 1)).collect()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_solve() {
        let b = vec![q(1, 2), q(-3, 1)];
        match rational_solve(&mat(&[&[1, 0], &[0, 1]]), &b).unwrap() {
            SolveOutcome::Solution { particular, nullspace } => {
                assert_eq!(particular, b);
                assert!(nullspace.is_empty());
            }
            SolveOutcome::Inconsistent => panic!("consistent"),
        }
    }

    #[test]
    fn underdetermined_solve() {
        match rational_solve(&mat(&[&[1, 1]]), &[q(1, 1)]).unwrap() {
            SolveOutcome::Solution { particular, nullspace } => {
                assert_eq!(particular, vec![q(1, 1), q(0, 1)]);
                assert_eq!(nullspace, vec![vec![q(-1, 1), q(1, 1)]]);
            }
            SolveOutcome::Inconsistent => panic!("consistent"),
        }
    }

    #[test]
    fn inconsistent_solve() {
        let out = rational_solve(&mat(&[&[1, 1], &[2, 2]]), &[q(1, 1), q(3, 1)]).unwrap();
        assert_eq!(out, SolveOutcome::Inconsistent);
    }

    #[test]
    fn ldl_examples() {
        let f = rational_ldl(&mat(&[&[2, 1], &[1, 2]])).unwrap();
        assert_eq!(f.d, vec![q(2, 1), q(3, 2)]);
        assert_eq!(f.l[(1, 0)], q(1, 2));
        let g = rational_ldl(&mat(&[&[0, 0], &[0, 1]])).unwrap();
        assert_eq!(g.d, vec![q(1, 1), q(0, 1)]);
        assert_eq!(g.perm, vec![1, 0]);
        assert_eq!(g.reconstruct(), mat(&[&[0, 0], &[0, 1]]));
        assert!(matches!(rational_ldl(&mat(&[&[1, 2], &[2, 1]])), Err(GramError::NotPsd { .. })));
        assert!(matches!(rational_ldl(&mat(&[&[0, 1], &[1, 0]])), Err(GramError::NotPsd { .. })));
    }

    #[test]
    fn ldl_reconstructs_exactly() {
        let a = mat(&[&[4, 2, -2, 0], &[2, 5, 1, 3], &[-2, 1, 6, 3], &[0, 3, 3, 3]]);
        let f = rational_ldl(&a).unwrap();
        assert_eq!(f.reconstruct(), a);
        let _ = BigRational::from_int(0);
    }
}
