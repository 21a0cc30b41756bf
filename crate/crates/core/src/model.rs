//! Quadrature-picture state-space models and physical realizability.
//!
//! A model `(A, B, C, D)` with `n` system mode pairs and `m` channel mode
//! pairs describes the linear quantum stochastic dynamics
//!
//! ```text
//! dx = A x dt + B dw,      dy = C x dt + D dw,
//! ```
//!
//! with `A ∈ R^{2n×2n}`, `B ∈ R^{2n×2m}`, `C ∈ R^{2m×2n}`, `D ∈ R^{2m×2m}`.
//! The dynamics preserve the canonical commutation relations exactly when
//! the three physical-realizability residuals
//!
//! ```text
//! R1 = A J_n + J_n A^T + B J_m B^T,
//! R2 = J_n C^T + B J_m D^T,
//! R3 = D J_m D^T - J_m,
//! ```
//!
//! all vanish.  [`StateSpaceModel::pr_residuals`] reports them (matrices and
//! Frobenius norms); [`pr_from_template`] constructs models for which they
//! vanish to machine precision from a Hamiltonian matrix and a coupling
//! matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::canonical::CanonicalStructure;
use crate::error::{Error, Result};
use crate::linalg;

/// Dense state-space realization with even quadrature dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    n: usize,
    m: usize,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl StateSpaceModel {
    /// Wraps `(A, B, C, D)` after checking shape consistency: `A` must be
    /// `2n×2n`, `B` `2n×2m`, `C` `2m×2n`, `D` `2m×2m` with `n, m ≥ 1`.
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 || a.nrows() % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "A must be square with even positive size, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let sn = a.nrows();
        if b.nrows() != sn || b.ncols() == 0 || b.ncols() % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "B must be {}x(2m), got {}x{}",
                sn,
                b.nrows(),
                b.ncols()
            )));
        }
        let sm = b.ncols();
        if c.nrows() != sm || c.ncols() != sn {
            return Err(Error::InvalidDimension(format!(
                "C must be {}x{}, got {}x{}",
                sm,
                sn,
                c.nrows(),
                c.ncols()
            )));
        }
        if d.nrows() != sm || d.ncols() != sm {
            return Err(Error::InvalidDimension(format!(
                "D must be {}x{}, got {}x{}",
                sm,
                sm,
                d.nrows(),
                d.ncols()
            )));
        }
        Ok(Self {
            n: sn / 2,
            m: sm / 2,
            a,
            b,
            c,
            d,
        })
    }

    /// Number of system mode pairs `n`.
    pub fn mode_count(&self) -> usize {
        self.n
    }

    /// Number of channel mode pairs `m`.
    pub fn channel_count(&self) -> usize {
        self.m
    }

    /// State dimension `2n`.
    pub fn state_dim(&self) -> usize {
        2 * self.n
    }

    /// Port dimension `2m`.
    pub fn port_dim(&self) -> usize {
        2 * self.m
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// Largest real part over the spectrum of `A`.
    pub fn stability_margin(&self) -> Result<f64> {
        linalg::spectral_abscissa(&self.a)
    }

    /// Whether `A` is Hurwitz (all eigenvalues strictly in the left half
    /// plane).  Computed on demand via a full eigendecomposition.
    pub fn is_hurwitz(&self) -> Result<bool> {
        Ok(self.stability_margin()? < 0.0)
    }

    /// Physical-realizability residual matrices and their Frobenius norms.
    pub fn pr_residuals(&self) -> PrResiduals {
        let jn = CanonicalStructure::new(self.n).expect("n >= 1 by construction");
        let jm = CanonicalStructure::new(self.m).expect("m >= 1 by construction");

        let b_jm = jm.right_mul(&self.b); // B J_m
        let r1 = jn.right_mul(&self.a) + jn.left_mul(&self.a.transpose()) + &b_jm * self.b.transpose();
        let r2 = jn.left_mul(&self.c.transpose()) + &b_jm * self.d.transpose();
        let r3 = jm.right_mul(&self.d) * self.d.transpose() - jm.matrix();

        let r1_norm = r1.norm();
        let r2_norm = r2.norm();
        let r3_norm = r3.norm();
        PrResiduals {
            r1,
            r2,
            r3,
            r1_norm,
            r2_norm,
            r3_norm,
        }
    }

    /// Transfer function `H(s) = C (sI - A)^{-1} B + D` at one point.
    ///
    /// Fails with [`Error::NearPole`] when the shifted solve is numerically
    /// singular, i.e. `s` is indistinguishable from an eigenvalue of `A`.
    pub fn transfer_eval(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        let dim = self.state_dim();
        let mut shifted = linalg::to_complex(&self.a);
        shifted.neg_mut();
        for i in 0..dim {
            shifted[(i, i)] += s;
        }
        let rhs = linalg::to_complex(&self.b);
        let x = linalg::solve_complex(shifted, &rhs).ok_or(Error::NearPole)?;
        Ok(linalg::to_complex(&self.c) * x + linalg::to_complex(&self.d))
    }
}

/// Frobenius-measured physical-realizability residuals.
#[derive(Debug, Clone)]
pub struct PrResiduals {
    pub r1: DMatrix<f64>,
    pub r2: DMatrix<f64>,
    pub r3: DMatrix<f64>,
    pub r1_norm: f64,
    pub r2_norm: f64,
    pub r3_norm: f64,
}

impl PrResiduals {
    /// Largest of the three residual norms.
    pub fn max_norm(&self) -> f64 {
        self.r1_norm.max(self.r2_norm).max(self.r3_norm)
    }
}

/// Symmetric Hamiltonian matrix `R` of a quadratic Hamiltonian
/// `H = (1/2) x^T R x`.  Symmetry is enforced exactly at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    r: DMatrix<f64>,
}

impl HamiltonianMatrix {
    /// Wraps `R`, requiring a square even-dimensional bitwise-symmetric
    /// matrix.  Callers that assemble `R` from symmetric stencils satisfy
    /// this for free; anything else should be symmetrized explicitly first.
    pub fn new(r: DMatrix<f64>) -> Result<Self> {
        if r.nrows() != r.ncols() || r.nrows() == 0 || r.nrows() % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "Hamiltonian matrix must be square with even positive size, got {}x{}",
                r.nrows(),
                r.ncols()
            )));
        }
        if r != r.transpose() {
            return Err(Error::ContractViolation(
                "Hamiltonian matrix must be exactly symmetric".into(),
            ));
        }
        Ok(Self { r })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// Number of mode pairs `n` (the matrix is `2n×2n`).
    pub fn mode_pairs(&self) -> usize {
        self.r.nrows() / 2
    }
}

/// Builds a physically realizable model from a Hamiltonian matrix `R` and a
/// coupling matrix `B` (its column count fixes the channel count):
///
/// ```text
/// A = J_n R + (1/2) B J_m B^T J_n,   C = J_m B^T J_n,   D = I.
/// ```
///
/// The resulting residuals `R1`, `R2`, `R3` vanish to machine precision
/// (`R3` exactly, since `D = I`).
pub fn pr_from_template(r: &HamiltonianMatrix, b: DMatrix<f64>) -> Result<StateSpaceModel> {
    let sn = r.matrix().nrows();
    if b.nrows() != sn || b.ncols() == 0 || b.ncols() % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "coupling matrix must be {}x(2m), got {}x{}",
            sn,
            b.nrows(),
            b.ncols()
        )));
    }
    let jn = CanonicalStructure::new(sn / 2)?;
    let jm = CanonicalStructure::new(b.ncols() / 2)?;

    // C = J_m B^T J_n, shared by the drift correction term.
    let c = jm.left_mul(&jn.right_mul(&b.transpose()));
    let a = jn.left_mul(r.matrix()) + 0.5 * &b * &c;
    let d = DMatrix::identity(b.ncols(), b.ncols());
    StateSpaceModel::new(a, b, c, d)
}
