//! Dense symmetric positive-definite solves.
//!
//! Everything the learner and the oracle factor has the form
//! `Gram + gamma*I` or an inner matrix `I + X R X^T`, both symmetric
//! positive definite, so a Cholesky factorization is the only
//! decomposition this crate needs.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
///
/// Stored row-major in a flat buffer; the strict upper triangle is zero.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Vec<f64>,
    n: usize,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Factors a symmetric positive-definite matrix as `L * L^T`.
///
/// Only the lower triangle of `a` is read. Fails with a condition estimate
/// when a pivot is not strictly positive.
pub fn cholesky(a: ArrayView2<'_, f64>) -> Result<Cholesky> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "cholesky input (must be square)".into(),
            expected: n,
            actual: a.ncols(),
        });
    }
    let max_diag = (0..n).map(|i| a[(i, i)].abs()).fold(0.0_f64, f64::max);
    let mut l = vec![0.0_f64; n * n];
    for j in 0..n {
        let row_j = &l[j * n..j * n + j];
        let d = a[(j, j)] - dot(row_j, row_j);
        if !(d > 0.0 && d.is_finite()) {
            let condition_estimate = if d.is_finite() && d != 0.0 {
                max_diag / d.abs()
            } else {
                f64::INFINITY
            };
            return Err(Error::Factorization { condition_estimate });
        }
        let pivot = d.sqrt();
        l[j * n + j] = pivot;
        for i in j + 1..n {
            let (head, tail) = l.split_at_mut(i * n);
            let row_j = &head[j * n..j * n + j];
            let row_i = &mut tail[..=j];
            let s = a[(i, j)] - dot(&row_i[..j], row_j);
            row_i[j] = s / pivot;
        }
    }
    Ok(Cholesky { l, n })
}

impl Cholesky {
    /// Side length of the factored matrix.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// The lower factor `L`.
    pub fn factor(&self) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((self.n, self.n), &self.l).expect("factor shape")
    }

    /// Solves `A X = B` for a matrix right-hand side.
    pub fn solve(&self, b: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if b.nrows() != self.n {
            return Err(Error::DimensionMismatch {
                what: "solve right-hand side rows".into(),
                expected: self.n,
                actual: b.nrows(),
            });
        }
        let mut x = Array2::from_shape_vec((b.nrows(), b.ncols()), b.iter().copied().collect())
            .expect("dense copy");
        self.solve_in_place(&mut x);
        Ok(x)
    }

    fn solve_in_place(&self, x: &mut Array2<f64>) {
        let n = self.n;
        let m = x.ncols();
        let buf = x.as_slice_mut().expect("standard layout");
        // forward: L z = b
        for i in 0..n {
            let (solved, rest) = buf.split_at_mut(i * m);
            let row_i = &mut rest[..m];
            let l_row = &self.l[i * n..i * n + i + 1];
            for (k, &c) in l_row[..i].iter().enumerate() {
                if c != 0.0 {
                    let row_k = &solved[k * m..(k + 1) * m];
                    for (xi, xk) in row_i.iter_mut().zip(row_k) {
                        *xi -= c * *xk;
                    }
                }
            }
            let inv = 1.0 / l_row[i];
            for v in row_i.iter_mut() {
                *v *= inv;
            }
        }
        // backward: L^T x = z
        for i in (0..n).rev() {
            let (head, solved) = buf.split_at_mut((i + 1) * m);
            let row_i = &mut head[i * m..];
            for k in i + 1..n {
                let c = self.l[k * n + i];
                if c != 0.0 {
                    let row_k = &solved[(k - i - 1) * m..(k - i) * m];
                    for (xi, xk) in row_i.iter_mut().zip(row_k) {
                        *xi -= c * *xk;
                    }
                }
            }
            let inv = 1.0 / self.l[i * n + i];
            for v in row_i.iter_mut() {
                *v *= inv;
            }
        }
    }

    /// The explicit inverse `A^{-1}`, symmetrized.
    pub fn inverse(&self) -> Array2<f64> {
        let mut inv = Array2::<f64>::eye(self.n);
        self.solve_in_place(&mut inv);
        symmetrize(&mut inv);
        inv
    }
}

/// `max |a - a^T|` over all entries; zero for exactly symmetric input.
pub fn max_asymmetry(a: ArrayView2<'_, f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Overwrites `a` with `(a + a^T) / 2`.
pub fn symmetrize(a: &mut Array2<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn spd_example() -> Array2<f64> {
        array![[4.0, 2.0, 0.6], [2.0, 5.0, 1.5], [0.6, 1.5, 3.0]]
    }

    #[test]
    fn factor_reconstructs_input() {
        let a = spd_example();
        let f = cholesky(a.view()).unwrap();
        let l = f.factor().to_owned();
        let back = l.dot(&l.t());
        for (x, y) in back.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_has_small_residual() {
        let a = spd_example();
        let b = array![[1.0, 0.5], [2.0, -1.0], [0.0, 3.0]];
        let f = cholesky(a.view()).unwrap();
        let x = f.solve(b.view()).unwrap();
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn inverse_multiplies_to_identity() {
        let a = spd_example();
        let inv = cholesky(a.view()).unwrap().inverse();
        let eye = a.dot(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((eye[(i, j)] - want).abs() < 1e-12);
            }
        }
        assert_eq!(max_asymmetry(inv.view()), 0.0);
    }

    #[test]
    fn indefinite_matrix_is_rejected_with_estimate() {
        let a = array![[1.0, 2.0], [2.0, 1.0]]; // eigenvalues 3 and -1
        match cholesky(a.view()) {
            Err(Error::Factorization { condition_estimate }) => {
                assert!(condition_estimate > 0.0);
            }
            other => panic!("expected factorization failure, got {other:?}"),
        }
    }

    #[test]
    fn non_square_is_rejected() {
        let a = Array2::<f64>::zeros((2, 3));
        assert!(matches!(
            cholesky(a.view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn solve_non_contiguous_rhs() {
        let a = spd_example();
        let big = array![[1.0, 9.0, 0.5], [2.0, 9.0, -1.0], [0.0, 9.0, 3.0]];
        let b = big.select(ndarray::Axis(1), &[0, 2]);
        let f = cholesky(a.view()).unwrap();
        let x = f.solve(b.view()).unwrap();
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn symmetrize_averages_off_diagonals() {
        let mut a = array![[1.0, 2.0], [4.0, 1.0]];
        symmetrize(&mut a);
        assert_eq!(a[(0, 1)], 3.0);
        assert_eq!(a[(1, 0)], 3.0);
    }
}
