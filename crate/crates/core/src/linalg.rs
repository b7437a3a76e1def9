//! Dense square matrices and a tolerant Cholesky factorization.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Row-major `n x n` matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Matrix {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from nested rows; every row must have `rows.len()` entries.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Matrix> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.max_asymmetry() == 0.0
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrized(&self) -> Matrix {
        let mut s = self.clone();
        for i in 0..self.n {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// First off-diagonal entry with magnitude above `tol`, if any.
    pub fn first_off_diagonal(&self, tol: f64) -> Option<(usize, usize, f64)> {
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self[(i, j)].abs() > tol {
                    return Some((i, j, self[(i, j)]));
                }
            }
        }
        None
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = Matrix::zeros(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                let a = self[(i, k)];
                for j in 0..self.n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Relative pivot tolerance: pivots down to `-PIVOT_TOL * max(diag)` are
/// clamped to zero.
pub const PIVOT_TOL: f64 = 1e-10;

/// Lower-triangular `L` with `L Lᵀ = a`, in the original variable order.
///
/// Pivots in `[-tol, tol]` (with `tol = PIVOT_TOL * max diagonal`) are
/// treated as zero and produce an all-zero column; the remaining entries in
/// such a column must themselves be negligible or the matrix is not PSD.
pub fn cholesky_psd(a: &Matrix) -> Result<Matrix> {
    let n = a.dim();
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0f64, f64::max);
    let tol = PIVOT_TOL * max_diag;
    // Off-diagonal residual allowed under a zero pivot: |r_ik|^2 <= tol * max_diag.
    let coupling_tol = (tol * max_diag).sqrt();
    let mut l = Matrix::zeros(n);
    for k in 0..n {
        let pivot = a[(k, k)] - (0..k).map(|p| l[(k, p)] * l[(k, p)]).sum::<f64>();
        if pivot < -tol {
            return Err(Error::NotPsd { index: k, pivot });
        }
        if pivot <= tol {
            for i in k + 1..n {
                let r = a[(i, k)] - (0..k).map(|p| l[(i, p)] * l[(k, p)]).sum::<f64>();
                if r.abs() > coupling_tol {
                    // Zero pivot with nonzero coupling: the 2x2 minor is indefinite.
                    return Err(Error::NotPsd { index: k, pivot });
                }
            }
            continue;
        }
        let d = pivot.sqrt();
        l[(k, k)] = d;
        for i in k + 1..n {
            let r = a[(i, k)] - (0..k).map(|p| l[(i, p)] * l[(k, p)]).sum::<f64>();
            l[(i, k)] = r / d;
        }
    }
    Ok(l)
}
