//! Canonical skew-symmetric structure of quadrature phase space.
//!
//! With quadratures ordered mode-by-mode as `(x_1, p_1, ..., x_k, p_k)`, the
//! commutation structure is carried by
//!
//! ```text
//! J_k = I_k ⊗ [[0, 1], [-1, 0]],
//! ```
//!
//! which satisfies `J^T = -J`, `J^2 = -I`, and `J J^T = I`.  All products
//! with `J` are applied structurally (row/column swaps and sign flips), so
//! they are exact in floating point and cost `O(size)` instead of a general
//! matrix product.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// The canonical skew form `J_k` for `k` mode pairs (dimension `2k`).
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalStructure {
    k: usize,
    j: DMatrix<f64>,
}

impl CanonicalStructure {
    /// Builds `J_k`.  `k` is the number of mode pairs and must be positive.
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDimension(
                "canonical structure needs at least one mode pair".into(),
            ));
        }
        let mut j = DMatrix::zeros(2 * k, 2 * k);
        for i in 0..k {
            j[(2 * i, 2 * i + 1)] = 1.0;
            j[(2 * i + 1, 2 * i)] = -1.0;
        }
        Ok(Self { k, j })
    }

    /// Number of mode pairs `k`.
    pub fn mode_pairs(&self) -> usize {
        self.k
    }

    /// Phase-space dimension `2k`.
    pub fn dim(&self) -> usize {
        2 * self.k
    }

    /// Dense view of `J_k` (entries exactly in `{0, 1, -1}`).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    /// `J x` for a vector.
    pub fn apply_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.nrows(), self.dim(), "vector/structure dimension mismatch");
        let mut out = DVector::zeros(x.nrows());
        for i in 0..self.k {
            out[2 * i] = x[2 * i + 1];
            out[2 * i + 1] = -x[2 * i];
        }
        out
    }

    /// `J^T x = -J x` for a vector.
    pub fn apply_vec_t(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.nrows(), self.dim(), "vector/structure dimension mismatch");
        let mut out = DVector::zeros(x.nrows());
        for i in 0..self.k {
            out[2 * i] = -x[2 * i + 1];
            out[2 * i + 1] = x[2 * i];
        }
        out
    }

    /// `J X` for a matrix with `2k` rows.
    pub fn left_mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.dim(), "matrix/structure dimension mismatch");
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for c in 0..x.ncols() {
            for i in 0..self.k {
                out[(2 * i, c)] = x[(2 * i + 1, c)];
                out[(2 * i + 1, c)] = -x[(2 * i, c)];
            }
        }
        out
    }

    /// `J^T X = -J X` for a matrix with `2k` rows.
    pub fn left_mul_t(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.dim(), "matrix/structure dimension mismatch");
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for c in 0..x.ncols() {
            for i in 0..self.k {
                out[(2 * i, c)] = -x[(2 * i + 1, c)];
                out[(2 * i + 1, c)] = x[(2 * i, c)];
            }
        }
        out
    }

    /// `X J` for a matrix with `2k` columns.
    pub fn right_mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.ncols(), self.dim(), "matrix/structure dimension mismatch");
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for i in 0..self.k {
            for r in 0..x.nrows() {
                out[(r, 2 * i)] = -x[(r, 2 * i + 1)];
                out[(r, 2 * i + 1)] = x[(r, 2 * i)];
            }
        }
        out
    }

    /// `X J^T = -X J` for a matrix with `2k` columns.
    pub fn right_mul_t(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.ncols(), self.dim(), "matrix/structure dimension mismatch");
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for i in 0..self.k {
            for r in 0..x.nrows() {
                out[(r, 2 * i)] = x[(r, 2 * i + 1)];
                out[(r, 2 * i + 1)] = -x[(r, 2 * i)];
            }
        }
        out
    }
}
