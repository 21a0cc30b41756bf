//! Internal dense linear-algebra helpers shared across modules.
//!
//! Everything here wraps nalgebra kernels with (a) explicit failure paths
//! instead of panics and (b) pivot-based singularity checks for the shifted
//! solves, so callers can map failures to the crate's error taxonomy.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative pivot threshold below which an LU factorization is treated as
/// singular.  Chosen so that shifts that are exact (to roundoff) eigenvalues
/// are flagged while merely ill-conditioned solves still go through.
pub(crate) const SINGULAR_PIVOT_REL: f64 = 1e-13;

/// Iteration cap handed to nalgebra's Francis QR; generous enough that
/// failures indicate a genuine breakdown rather than a tight budget.
const SCHUR_MAX_ITER: usize = 100_000;

/// Real Schur decomposition `A = Z T Z^T` with quasi-triangular `T`.
pub(crate) fn schur(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let s = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::NumericalBreakdown("real Schur iteration did not converge".into()))?;
    let (z, t) = s.unpack();
    Ok((z, t))
}

/// Full complex spectrum of a real matrix via the real Schur form.
pub(crate) fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let s = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::NumericalBreakdown("eigenvalue iteration did not converge".into()))?;
    Ok(s.complex_eigenvalues().iter().copied().collect())
}

/// Largest real part over the spectrum (the spectral abscissa).
pub(crate) fn spectral_abscissa(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Widens a real matrix to complex entries.
pub(crate) fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| Complex64::new(a[(i, j)], 0.0))
}

/// LU solve of `M X = RHS` for real `M`, returning `None` when `M` is
/// numerically singular (zero or relatively tiny pivot).
pub(crate) fn solve_real(m: DMatrix<f64>, rhs: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let scale = m.norm();
    let lu = m.lu();
    let min_pivot = lu
        .u()
        .diagonal()
        .iter()
        .map(|p| p.abs())
        .fold(f64::INFINITY, f64::min);
    if min_pivot <= SINGULAR_PIVOT_REL * scale.max(f64::MIN_POSITIVE) {
        return None;
    }
    lu.solve(rhs)
}

/// LU solve of `M X = RHS` for complex `M`, with the same pivot policy.
pub(crate) fn solve_complex(
    m: DMatrix<Complex64>,
    rhs: &DMatrix<Complex64>,
) -> Option<DMatrix<Complex64>> {
    let scale = m.norm();
    let lu = m.lu();
    let min_pivot = lu
        .u()
        .diagonal()
        .iter()
        .map(|p| p.norm())
        .fold(f64::INFINITY, f64::min);
    if min_pivot <= SINGULAR_PIVOT_REL * scale.max(f64::MIN_POSITIVE) {
        return None;
    }
    lu.solve(rhs)
}
