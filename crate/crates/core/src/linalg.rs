//! Small dense linear algebra.
//!
//! Dimensions here are tiny (a dozen at most), so everything is stored in
//! plain `Vec<f64>` buffers and the algorithms are the textbook ones: LU with
//! partial pivoting for determinants and inverses, power iteration on `MᵀM`
//! for the spectral norm.

use std::fmt;
use std::ops::{Add, Deref, Index, IndexMut, Mul, Neg, Sub};

use thiserror::Error;

/// Errors raised by the linear algebra and rotation primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty vector or matrix")]
    Empty,
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular (|det| = {det:e})")]
    Singular { det: f64 },
    #[error("vector is not unit length (norm = {norm})")]
    NotUnit { norm: f64 },
    #[error("antipodal pair: 1 + <u,v> = {gap:e} is below the tolerance {tolerance:e}")]
    Antipodal { gap: f64, tolerance: f64 },
    #[error("vector is not orthogonal to the reference (inner product {inner:e})")]
    NotOrthogonal { inner: f64 },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("columns do not form an orthonormal family (defect {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error("angular gap {gap:.4} rad between samples {index} and {next} exceeds {limit:.4} rad")]
    AngularGap {
        index: usize,
        next: usize,
        gap: f64,
        limit: f64,
    },
    #[error("probe parameter t = {t} is outside (0, 1e-2]")]
    ProbeParameter { t: f64 },
}

/// A real vector of finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self, LinalgError> {
        if entries.is_empty() {
            return Err(LinalgError::Empty);
        }
        if let Some(index) = entries.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self(entries))
    }

    /// Wraps entries without validation. Arithmetic results use this.
    pub(crate) fn from_vec(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector (zero-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    /// Max-norm, kept for cross-checks.
    pub fn max_norm(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self(self.0.iter().map(|x| k * x).collect())
    }

    /// Unit vector in the same direction.
    pub fn normalized(&self) -> Result<Self, LinalgError> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(LinalgError::ZeroVector);
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn distance(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<(), LinalgError> {
        if self.dim() != expected {
            return Err(LinalgError::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// Euclidean norm of a slice, scaled to avoid overflow for large entries.
pub fn norm2(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale
        * x.iter()
            .map(|v| (v / scale) * (v / scale))
            .sum::<f64>()
            .sqrt()
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|x| -x).collect())
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, d) in entries.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Builds a matrix from rows, checking they are rectangular and finite.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        if r == 0 || rows[0].is_empty() {
            return Err(LinalgError::Empty);
        }
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(LinalgError::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    /// Stacks the given vectors as columns.
    pub fn from_columns(cols: &[&[f64]]) -> Result<Self, LinalgError> {
        if cols.is_empty() || cols[0].is_empty() {
            return Err(LinalgError::Empty);
        }
        let rows = cols[0].len();
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            if col.len() != rows {
                return Err(LinalgError::DimensionMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = *x;
            }
        }
        Ok(m)
    }

    /// Outer product `a bᵀ`.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                m[(i, j)] = x * y;
            }
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

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vector {
        Vector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| k * x).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vector {
        assert_eq!(self.cols, x.len(), "matrix-vector dimension mismatch");
        Vector(
            (0..self.rows)
                .map(|i| {
                    self.data[i * self.cols..(i + 1) * self.cols]
                        .iter()
                        .zip(x)
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect(),
        )
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    fn require_square(&self) -> Result<(), LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    /// LU factorisation with partial pivoting: returns the packed factors,
    /// the row permutation and its sign.
    fn lu(&self) -> (Vec<f64>, Vec<usize>, f64) {
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap_or(k);
            if pivot != k {
                for c in 0..n {
                    a.swap(k * n + c, pivot * n + c);
                }
                perm.swap(k, pivot);
                sign = -sign;
            }
            let d = a[k * n + k];
            if d == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let l = a[i * n + k] / d;
                a[i * n + k] = l;
                for c in k + 1..n {
                    a[i * n + c] -= l * a[k * n + c];
                }
            }
        }
        (a, perm, sign)
    }

    /// Determinant via LU.
    pub fn det(&self) -> Result<f64, LinalgError> {
        self.require_square()?;
        let n = self.rows;
        let (lu, _, sign) = self.lu();
        Ok((0..n).fold(sign, |acc, i| acc * lu[i * n + i]))
    }

    /// Inverse via LU. Refuses when `|det|` falls below `1e-13 · max|a_ij|ⁿ`.
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        self.require_square()?;
        let n = self.rows;
        let (lu, perm, sign) = self.lu();
        let det = (0..n).fold(sign, |acc, i| acc * lu[i * n + i]);
        let scale = self.max_abs();
        if scale == 0.0 || !det.is_finite() || det.abs() <= SINGULAR_TOL * scale.powi(n as i32) {
            return Err(LinalgError::Singular { det });
        }
        let mut inv = Self::zeros(n, n);
        for col in 0..n {
            // Solve L U x = P e_col.
            let mut x: Vec<f64> = perm
                .iter()
                .map(|&p| if p == col { 1.0 } else { 0.0 })
                .collect();
            for i in 0..n {
                for k in 0..i {
                    x[i] -= lu[i * n + k] * x[k];
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    x[i] -= lu[i * n + k] * x[k];
                }
                x[i] /= lu[i * n + i];
            }
            for (i, v) in x.into_iter().enumerate() {
                inv[(i, col)] = v;
            }
        }
        Ok(inv)
    }

    /// Spectral norm by power iteration on `MᵀM`.
    ///
    /// Starts from the normalised all-ones vector, stops when the Rayleigh
    /// quotient changes by less than `1e-12` relatively or after 500
    /// iterations. A second, fixed start vector guards against the all-ones
    /// vector lying in a non-dominant invariant subspace.
    pub fn op_norm(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let m = self.scale(1.0 / scale);
        let gram = &m.transpose() * &m;
        let n = gram.rows;
        let ones = vec![1.0; n];
        let alternate: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s / (1.0 + i as f64)
            })
            .collect();
        let lambda = power_iterate(&gram, &ones).max(power_iterate(&gram, &alternate));
        scale * lambda.max(0.0).sqrt()
    }
}

/// Relative singularity threshold for [`Matrix::inverse`].
pub const SINGULAR_TOL: f64 = 1e-13;

const POWER_MAX_ITERS: usize = 500;
const POWER_REL_TOL: f64 = 1e-12;

fn power_iterate(gram: &Matrix, start: &[f64]) -> f64 {
    let mut x = Vector(start.to_vec());
    let n0 = x.norm();
    if n0 == 0.0 {
        return 0.0;
    }
    x = x.scale(1.0 / n0);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let y = gram.mul_vec(&x);
        let next = x.dot(&y);
        let ny = y.norm();
        if ny == 0.0 {
            return next.max(0.0);
        }
        x = y.scale(1.0 / ny);
        let done = (next - lambda).abs() <= POWER_REL_TOL * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:>10.6}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Free-function spelling of [`Matrix::inverse`].
pub fn mat_inverse(m: &Matrix) -> Result<Matrix, LinalgError> {
    m.inverse()
}

/// Free-function spelling of [`Matrix::det`].
pub fn mat_det(m: &Matrix) -> Result<f64, LinalgError> {
    m.det()
}

/// Free-function spelling of [`Matrix::op_norm`].
pub fn op_norm(m: &Matrix) -> f64 {
    m.op_norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Cofactor expansion, independent of the LU path.
    fn det_cofactor(m: &Matrix) -> f64 {
        let n = m.rows();
        if n == 1 {
            return m[(0, 0)];
        }
        (0..n)
            .map(|j| {
                let minor_rows: Vec<Vec<f64>> = (1..n)
                    .map(|i| (0..n).filter(|&c| c != j).map(|c| m[(i, c)]).collect())
                    .collect();
                let minor = Matrix::from_rows(&minor_rows).unwrap();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[(0, j)] * det_cofactor(&minor)
            })
            .sum()
    }

    #[test]
    fn inverse_of_identity() {
        let id = Matrix::identity(4);
        assert_eq!(mat_inverse(&id).unwrap(), id);
    }

    #[test]
    fn op_norm_of_diagonal() {
        let d = Matrix::diagonal(&[3.0, -5.0]);
        assert!((op_norm(&d) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_survives_unlucky_start_vector() {
        // MᵀM annihilates the all-ones vector.
        let m = Matrix::from_rows(&[vec![1.0, -1.0], vec![1.0, -1.0]]).unwrap();
        assert!((m.op_norm() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn op_norm_matches_closed_form_for_2x2() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let rows: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..2).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let m = Matrix::from_rows(&rows).unwrap();
            // Largest eigenvalue of the symmetric 2x2 Gram matrix.
            let g = &m.transpose() * &m;
            let (a, b, d) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
            let lam = 0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt();
            assert!((m.op_norm() - lam.sqrt()).abs() < 1e-6 * lam.sqrt().max(1.0));
        }
    }

    #[test]
    fn rotation_example_has_unit_determinant() {
        let r = Matrix::from_rows(&[
            vec![0.0, 0.0, -1.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!((det_cofactor(&r) - 1.0).abs() < 1e-15);
        assert!((mat_det(&r).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lu_determinant_agrees_with_cofactors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 1..=5 {
            for _ in 0..20 {
                let rows: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect();
                let m = Matrix::from_rows(&rows).unwrap();
                let want = det_cofactor(&m);
                assert!((m.det().unwrap() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_is_accurate_for_well_conditioned_input() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 1..=8 {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| rng.random_range(-0.3..0.3) + if i == j { 2.0 } else { 0.0 })
                        .collect()
                })
                .collect();
            let m = Matrix::from_rows(&rows).unwrap();
            let prod = &m * &m.inverse().unwrap();
            assert!((&prod - &Matrix::identity(n)).frobenius_norm() <= 1e-9);
        }
    }

    #[test]
    fn singular_and_non_square_are_rejected() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(s.inverse(), Err(LinalgError::Singular { .. })));
        let r = Matrix::zeros(2, 3);
        assert!(matches!(r.det(), Err(LinalgError::NotSquare { .. })));
        assert!(matches!(r.inverse(), Err(LinalgError::NotSquare { .. })));
    }

    #[test]
    fn vector_rejects_non_finite() {
        assert!(matches!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(LinalgError::NonFinite { index: 1 })
        ));
        assert!(matches!(Vector::new(vec![]), Err(LinalgError::Empty)));
    }
}
