//! Small dense linear algebra for the M×M projection systems.
//!
//! Matrices are row-major. The only factorization needed is Cholesky on
//! `A + eps·I`, where `A` is a Gram matrix of at most a few dozen columns.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::invalid(
                "matrix data length does not match rows·cols",
            ));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds an `len × columns.len()` matrix whose j-th column is `columns[j]`.
    pub fn from_columns(columns: &[&[f64]]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid("columns have unequal lengths"));
        }
        let mut m = Matrix::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m.data[i * cols + j] = x;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `self · x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::invalid("matrix-vector dimension mismatch"));
        }
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| dot(row, x))
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
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
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Returns `UᵀU` for an `L×M` matrix `U`.
pub fn gram_matrix(u: &Matrix) -> Result<Matrix> {
    if u.rows == 0 || u.cols == 0 {
        return Err(Error::invalid(
            "gram_matrix needs at least one row and one column",
        ));
    }
    let m = u.cols;
    let mut g = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let s: f64 = (0..u.rows).map(|r| u.get(r, i) * u.get(r, j)).sum();
            g.set(i, j, s);
            g.set(j, i, s);
        }
    }
    Ok(g)
}

/// Gram matrix of a set of equal-length column vectors, optionally weighted
/// entrywise by `weights` (i.e. `UᵀGU` with `G = diag(weights)`).
pub fn gram_of_columns(columns: &[Vec<f64>], weights: Option<&[f64]>) -> Matrix {
    let m = columns.len();
    let mut g = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let s = match weights {
                None => dot(&columns[i], &columns[j]),
                Some(w) => columns[i]
                    .iter()
                    .zip(&columns[j])
                    .zip(w)
                    .map(|((a, b), g)| a * b * g)
                    .sum(),
            };
            g.set(i, j, s);
            g.set(j, i, s);
        }
    }
    g
}

/// Lower-triangular Cholesky factor of `A + eps·I`.
pub fn cholesky(a: &Matrix, eps: f64) -> Result<Matrix> {
    if a.rows != a.cols {
        return Err(Error::invalid("cholesky needs a square matrix"));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::invalid(
            "regularization must be finite and non-negative",
        ));
    }
    if a.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix entries must be finite"));
    }
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j) + eps;
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > 0.0) {
            return Err(Error::NumericFailure(alloc::format!(
                "matrix is not positive definite (pivot {j} = {d:e})"
            )));
        }
        let d = libm::sqrt(d);
        l.set(j, j, d);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    Ok(l)
}

/// Solves `(A + eps·I) x = b` for symmetric positive (semi-)definite `A`.
pub fn solve_spd(a: &Matrix, b: &[f64], eps: f64) -> Result<Vec<f64>> {
    if b.len() != a.rows {
        return Err(Error::invalid(
            "right-hand side length does not match matrix",
        ));
    }
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("right-hand side must be finite"));
    }
    let l = cholesky(a, eps)?;
    let n = b.len();
    // forward: L y = b
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    // backward: Lᵀ x = y
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l.get(k, i) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    Ok(y)
}

#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Componentwise sign with `sign(0) = 0`.
pub fn sign_vector(w: &[f64]) -> Vec<f64> {
    w.iter().map(|&x| sign(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
        let data = (0..rows * cols)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Matrix::from_row_major(rows, cols, data).unwrap()
    }

    #[test]
    fn gram_of_identity_and_single_column() {
        let g = gram_matrix(&Matrix::identity(2)).unwrap();
        assert_eq!(g, Matrix::identity(2));
        let u = Matrix::from_row_major(2, 1, vec![3.0, 4.0]).unwrap();
        assert_eq!(gram_matrix(&u).unwrap().data(), &[25.0]);
    }

    #[test]
    fn gram_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_matrix(&mut rng, 8, 4);
        let g = gram_matrix(&u).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for r in 0..8 {
                    s += u.data()[r * 4 + i] * u.data()[r * 4 + j];
                }
                assert!((g.get(i, j) - s).abs() < 1e-14);
            }
        }
        let cols: Vec<Vec<f64>> = (0..4).map(|j| u.column(j)).collect();
        let g2 = gram_of_columns(&cols, None);
        for (a, b) in g.data().iter().zip(g2.data()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn gram_rejects_empty() {
        assert!(matches!(
            gram_matrix(&Matrix::zeros(0, 3)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn solve_trivial_systems() {
        assert_eq!(
            solve_spd(&Matrix::identity(2), &[1.0, 2.0], 0.0).unwrap(),
            vec![1.0, 2.0]
        );
        let a = Matrix::from_row_major(2, 2, vec![4.0, 0.0, 0.0, 4.0]).unwrap();
        assert_eq!(solve_spd(&a, &[8.0, 4.0], 0.0).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn solve_errors() {
        let singular = Matrix::from_row_major(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            solve_spd(&singular, &[1.0, 0.0], 0.0),
            Err(Error::NumericFailure(_))
        ));
        // regularization rescues the singular matrix
        assert!(solve_spd(&singular, &[1.0, 0.0], 1e-3).is_ok());
        assert!(matches!(
            solve_spd(&Matrix::identity(2), &[f64::NAN, 0.0], 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(Matrix::from_row_major(1, 1, vec![f64::INFINITY]).is_err());
    }

    fn residual_ok(a: &Matrix, b: &[f64], eps: f64, x: &[f64]) -> bool {
        let ax = a.mul_vec(x).unwrap();
        let r: f64 = ax
            .iter()
            .zip(x)
            .zip(b)
            .map(|((ax, x), b)| {
                let d = ax + eps * x - b;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        let xn = dot(x, x).sqrt();
        r <= 1e-10 * (a.frobenius_norm() + eps) * xn + 1e-12
    }

    #[test]
    fn solve_random_spd_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_matrix(&mut rng, 12, 8);
        let a = gram_matrix(&u).unwrap();
        let b: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = solve_spd(&a, &b, 1e-4).unwrap();
        assert!(residual_ok(&a, &b, 1e-4, &x));
    }

    #[test]
    fn solve_residual_bound_over_many_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let m = rng.random_range(1..=16);
            let rows = m + rng.random_range(0..8);
            let u = random_matrix(&mut rng, rows, m);
            let a = gram_matrix(&u).unwrap();
            let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let eps = 1e-6;
            let x = solve_spd(&a, &b, eps).unwrap();
            assert!(residual_ok(&a, &b, eps, &x));
        }
    }

    #[test]
    fn sign_examples() {
        assert_eq!(sign_vector(&[1.5, -2.0, 0.0]), vec![1.0, -1.0, 0.0]);
        assert_eq!(sign_vector(&[0.0; 3]), vec![0.0; 3]);
        assert_eq!(sign_vector(&[-1e-300, 1e-300]), vec![-1.0, 1.0]);
    }

    proptest! {
        #[test]
        fn sign_is_idempotent(w in proptest::collection::vec(-1e3f64..1e3, 0..32)) {
            let s = sign_vector(&w);
            prop_assert_eq!(sign_vector(&s), s);
        }

        #[test]
        fn gram_is_symmetric(rows in 1usize..10, cols in 1usize..6, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_matrix(&mut rng, rows, cols);
            let g = gram_matrix(&u).unwrap();
            let t = g.transpose();
            let asym = g.data().iter().zip(t.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(asym <= 1e-12 * g.frobenius_norm());
        }
    }
}
