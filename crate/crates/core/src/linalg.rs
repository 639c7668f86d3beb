//! Dense square matrices and their symmetric subtype.
//!
//! Storage is row-major `Vec<f64>`. Everything here is sized for desk-scale
//! problems (a few dozen rows), so the kernels are the plain triple loops.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// General dense square matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major data, rejecting ragged or non-finite input.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        let m = Self { dim, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "matrix must have at least one row".into(),
            ));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    row: i,
                    len: row.len(),
                    dim,
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(dim, data)
    }

    fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(Error::NonFinite {
                row: k / self.dim,
                col: k % self.dim,
            }),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.dim.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        ensure_same_dim(self.dim, rhs.dim)?;
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(Matrix { dim: n, data: out })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrize(&self) -> SymMatrix {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        SymMatrix(out)
    }

    pub fn try_add(&self, rhs: &Matrix) -> Result<Matrix> {
        ensure_same_dim(self.dim, rhs.dim)?;
        Ok(self.zip_with(rhs, |a, b| a + b))
    }

    pub fn try_sub(&self, rhs: &Matrix) -> Result<Matrix> {
        ensure_same_dim(self.dim, rhs.dim)?;
        Ok(self.zip_with(rhs, |a, b| a - b))
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Q factor of a Householder QR factorization, with column signs fixed so
    /// that `R` has a nonnegative diagonal.
    pub fn qr_orthogonal_factor(&self) -> Matrix {
        let n = self.dim;
        let mut r = self.clone();
        let mut q = Matrix::identity(n);
        for k in 0..n.saturating_sub(1) {
            let norm: f64 = (k..n).map(|i| r.get(i, k).powi(2)).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let alpha = if r.get(k, k) > 0.0 { -norm } else { norm };
            let mut v: Vec<f64> = (k..n).map(|i| r.get(i, k)).collect();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            // R <- H R, Q <- Q H with H = I - 2 v vᵀ / (vᵀv)
            for j in 0..n {
                let dot: f64 = (k..n).map(|i| v[i - k] * r.get(i, j)).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..n {
                    r.set(i, j, r.get(i, j) - f * v[i - k]);
                }
            }
            for i in 0..n {
                let dot: f64 = (k..n).map(|j| q.get(i, j) * v[j - k]).sum();
                let f = 2.0 * dot / vnorm2;
                for j in k..n {
                    q.set(i, j, q.get(i, j) - f * v[j - k]);
                }
            }
        }
        for j in 0..n {
            if r.get(j, j) < 0.0 {
                for i in 0..n {
                    q.set(i, j, -q.get(i, j));
                }
            }
        }
        q
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

fn ensure_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Real symmetric matrix. Symmetry is exact: construction averages the input
/// with its transpose.
#[derive(Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        m.check_finite()?;
        Ok(m.symmetrize())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(Matrix::from_rows(rows)?.symmetrize())
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix(Matrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(Matrix::identity(dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix(Matrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.0.rows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        SymMatrix(self.0.scale(s))
    }

    pub fn try_add(&self, rhs: &SymMatrix) -> Result<SymMatrix> {
        Ok(SymMatrix(self.0.try_add(&rhs.0)?))
    }

    pub fn try_sub(&self, rhs: &SymMatrix) -> Result<SymMatrix> {
        Ok(SymMatrix(self.0.try_sub(&rhs.0)?))
    }

    /// Spectral radius, `max |λᵢ|`.
    pub fn operator_norm(&self) -> Result<f64> {
        let eig = self.eigh()?;
        Ok(eig
            .eigenvalues()
            .iter()
            .fold(0.0_f64, |m, l| m.max(l.abs())))
    }

    /// Relative Frobenius distance `‖self − other‖ / max(‖other‖, tiny)`.
    pub fn relative_distance(&self, other: &SymMatrix) -> f64 {
        let diff = self.0.zip_with(&other.0, |a, b| a - b).frobenius_norm();
        diff / other.frobenius_norm().max(f64::MIN_POSITIVE)
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        self.try_add(rhs)
            .expect("dimension mismatch in SymMatrix addition")
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        self.try_sub(rhs)
            .expect("dimension mismatch in SymMatrix subtraction")
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        self.scale(rhs)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
            .expect("dimension mismatch in matrix product")
    }
}

/// `X A Xᵀ`, re-symmetrized.
pub fn congruence(x: &Matrix, a: &SymMatrix) -> Result<SymMatrix> {
    ensure_same_dim(a.dim(), x.dim())?;
    let xa = x.matmul(a.as_matrix())?;
    Ok(xa.matmul(&x.transpose())?.symmetrize())
}

/// Outcome of a Loewner-order comparison. `witness` is `λ_min(a − b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoewnerVerdict {
    pub holds: bool,
    pub witness: f64,
}

/// Tests `a ≥ b` in the Loewner order: `a − b` must be positive semidefinite up
/// to `rel_tol · max(1, ‖a‖, ‖b‖)`.
pub fn loewner_geq(a: &SymMatrix, b: &SymMatrix, rel_tol: f64) -> Result<LoewnerVerdict> {
    let diff = a.try_sub(b)?;
    let witness = diff.eigh()?.min_eigenvalue();
    let scale = 1.0_f64.max(a.operator_norm()?).max(b.operator_norm()?);
    Ok(LoewnerVerdict {
        holds: witness >= -rel_tol * scale,
        witness,
    })
}
