//! Gramian, Hankel, and H2 analysis of stable models.
//!
//! The workhorse is a dense Bartels–Stewart Lyapunov solver on the real
//! Schur form; Gramians, Hankel singular values, H2 norms, and H2 errors
//! are built on top of it.  Transmission zeros and the interpolation
//! residuals at mirrored reduced poles round out the diagnostics used to
//! judge a reduction.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::StateSpaceModel;

/// Diagonal block partition (start, size) of a real quasi-triangular
/// matrix.  Subdiagonal entries below a relative threshold are treated as
/// deflated.
fn diagonal_blocks(t: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let dim = t.nrows();
    let tol = 100.0 * f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
    let mut blocks = Vec::with_capacity(dim);
    let mut i = 0;
    while i < dim {
        if i + 1 < dim && t[(i + 1, i)].abs() > tol {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    blocks
}

/// Largest real part over the spectrum encoded in the diagonal blocks.
fn block_spectral_abscissa(t: &DMatrix<f64>, blocks: &[(usize, usize)]) -> f64 {
    let mut margin = f64::NEG_INFINITY;
    for &(s, len) in blocks {
        let re = if len == 1 {
            t[(s, s)]
        } else {
            0.5 * (t[(s, s)] + t[(s + 1, s + 1)])
        };
        margin = margin.max(re);
    }
    margin
}

/// Solves `T Y + Y T^T = C` for quasi-upper-triangular `T` by block back
/// substitution; each diagonal block pair reduces to a ≤4×4 Kronecker
/// system `(I ⊗ T_II + T_JJ ⊗ I) vec(Y_IJ) = vec(RHS)`.
fn quasi_triangular_lyapunov(
    t: &DMatrix<f64>,
    c: &DMatrix<f64>,
    blocks: &[(usize, usize)],
) -> Result<DMatrix<f64>> {
    let dim = t.nrows();
    let mut y = DMatrix::zeros(dim, dim);
    for &(sj, nj) in blocks.iter().rev() {
        for &(si, ni) in blocks.iter().rev() {
            let mut rhs = c.view((si, sj), (ni, nj)).into_owned();
            let after_i = si + ni;
            if after_i < dim {
                rhs -= t.view((si, after_i), (ni, dim - after_i))
                    * y.view((after_i, sj), (dim - after_i, nj));
            }
            let after_j = sj + nj;
            if after_j < dim {
                rhs -= y.view((si, after_j), (ni, dim - after_j))
                    * t.view((sj, after_j), (nj, dim - after_j)).transpose();
            }

            // Small Kronecker system for the block unknown.
            let tii = t.view((si, si), (ni, ni));
            let tjj = t.view((sj, sj), (nj, nj));
            let mut m = DMatrix::zeros(ni * nj, ni * nj);
            for q in 0..nj {
                for p in 0..ni {
                    for p2 in 0..ni {
                        m[(p + q * ni, p2 + q * ni)] += tii[(p, p2)];
                    }
                    for q2 in 0..nj {
                        m[(p + q * ni, p + q2 * ni)] += tjj[(q, q2)];
                    }
                }
            }
            let mut vec_rhs = DVector::zeros(ni * nj);
            for q in 0..nj {
                for p in 0..ni {
                    vec_rhs[p + q * ni] = rhs[(p, q)];
                }
            }
            let sol = m.lu().solve(&vec_rhs).ok_or_else(|| {
                Error::NumericalBreakdown(
                    "singular diagonal-block system in Lyapunov back substitution".into(),
                )
            })?;
            for q in 0..nj {
                for p in 0..ni {
                    y[(si + p, sj + q)] = sol[p + q * ni];
                }
            }
        }
    }
    Ok(y)
}

/// Solves the continuous Lyapunov equation `A X + X A^T + Q = 0` for
/// Hurwitz `A` and symmetric `Q` (the input is symmetrized defensively).
/// Non-Hurwitz `A` is rejected with its spectral abscissa.
pub fn lyapunov_solve(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::InvalidDimension(format!(
            "drift must be square and nonempty, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if q.nrows() != a.nrows() || q.ncols() != a.ncols() {
        return Err(Error::InvalidDimension(format!(
            "right-hand side must be {}x{}, got {}x{}",
            a.nrows(),
            a.nrows(),
            q.nrows(),
            q.ncols()
        )));
    }
    let q_sym = 0.5 * (q + q.transpose());

    let (z, t) = linalg::schur(a)?;
    let blocks = diagonal_blocks(&t);
    let margin = block_spectral_abscissa(&t, &blocks);
    if margin >= 0.0 {
        return Err(Error::Unstable { margin });
    }

    // Transform, solve in Schur coordinates, transform back.
    let c = -(z.tr_mul(&q_sym) * &z);
    let y = quasi_triangular_lyapunov(&t, &c, &blocks)?;
    let x = &z * y * z.transpose();
    Ok(0.5 * (&x + x.transpose()))
}

/// Controllability and observability Gramians of a stable model.
#[derive(Debug, Clone)]
pub struct GramianPair {
    pub controllability: DMatrix<f64>,
    pub observability: DMatrix<f64>,
}

/// Solves the two Lyapunov equations
/// `A Wc + Wc A^T + B B^T = 0` and `A^T Wo + Wo A + C^T C = 0`.
pub fn gramians(model: &StateSpaceModel) -> Result<GramianPair> {
    let wc = lyapunov_solve(model.a(), &(model.b() * model.b().transpose()))?;
    let wo = lyapunov_solve(
        &model.a().transpose(),
        &(model.c().tr_mul(model.c())),
    )?;
    Ok(GramianPair {
        controllability: wc,
        observability: wo,
    })
}

/// Eigenvalues of a symmetric PSD matrix, with small negative roundoff
/// clipped to zero and genuine indefiniteness reported as breakdown.
fn psd_eigen(m: &DMatrix<f64>, what: &str) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let sym = 0.5 * (m + m.transpose());
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 100_000).ok_or_else(|| {
        Error::NumericalBreakdown(format!("symmetric eigensolver stalled on {what}"))
    })?;
    let max_abs = eig
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(0.0f64, f64::max);
    let indefinite_tol = 1e-10 * max_abs.max(1e-300);
    let mut values = Vec::with_capacity(eig.eigenvalues.len());
    for l in eig.eigenvalues.iter() {
        if *l < -indefinite_tol {
            return Err(Error::NumericalBreakdown(format!(
                "{what} is numerically indefinite (eigenvalue {l:.3e})"
            )));
        }
        values.push(l.max(0.0));
    }
    Ok((eig.eigenvectors, values))
}

/// Hankel singular values: `σ_i = sqrt(λ_i(Wc^{1/2} Wo Wc^{1/2}))`,
/// descending.  The symmetric square root keeps everything in symmetric
/// eigensolver territory.
pub fn hankel_singular_values(gramians: &GramianPair) -> Result<Vec<f64>> {
    let (vectors, values) = psd_eigen(&gramians.controllability, "controllability Gramian")?;
    let mut sqrt_wc = vectors.clone();
    for (j, l) in values.iter().enumerate() {
        sqrt_wc.column_mut(j).scale_mut(l.sqrt());
    }
    let sqrt_wc = sqrt_wc * vectors.transpose();

    let mid = &sqrt_wc * &gramians.observability * &sqrt_wc;
    let (_, mid_values) = psd_eigen(&mid, "Hankel product")?;
    let mut sigma: Vec<f64> = mid_values.into_iter().map(f64::sqrt).collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    Ok(sigma)
}

/// H2 norm via the controllability Gramian:
/// `‖H‖_{H2} = sqrt(trace(C Wc C^T))`.
pub fn h2_norm(model: &StateSpaceModel) -> Result<f64> {
    let wc = lyapunov_solve(model.a(), &(model.b() * model.b().transpose()))?;
    let val = (model.c() * wc * model.c().transpose()).trace();
    Ok(val.max(0.0).sqrt())
}

/// Absolute and relative H2 distance between two models.
#[derive(Debug, Clone, Copy)]
pub struct H2Error {
    pub absolute: f64,
    pub relative: f64,
}

/// H2 error through the block-diagonal error realization
/// `(diag(A, A_r), [B; B_r], [C, -C_r], 0)`.  The feed-through matrices
/// must agree bitwise (the projection never touches `D`), otherwise the
/// error system is not strictly proper and the H2 distance is undefined.
pub fn h2_error(full: &StateSpaceModel, reduced: &StateSpaceModel) -> Result<H2Error> {
    if full.port_dim() != reduced.port_dim() {
        return Err(Error::InvalidDimension(format!(
            "port dimensions differ ({} vs {})",
            full.port_dim(),
            reduced.port_dim()
        )));
    }
    if full.d() != reduced.d() {
        return Err(Error::ContractViolation(
            "feed-through mismatch: the H2 error is undefined".into(),
        ));
    }
    let (nf, nr) = (full.state_dim(), reduced.state_dim());
    let dim = nf + nr;

    let mut a_e = DMatrix::zeros(dim, dim);
    a_e.view_mut((0, 0), (nf, nf)).copy_from(full.a());
    a_e.view_mut((nf, nf), (nr, nr)).copy_from(reduced.a());

    let mut b_e = DMatrix::zeros(dim, full.port_dim());
    b_e.view_mut((0, 0), (nf, full.port_dim())).copy_from(full.b());
    b_e.view_mut((nf, 0), (nr, full.port_dim()))
        .copy_from(reduced.b());

    let mut c_e = DMatrix::zeros(full.port_dim(), dim);
    c_e.view_mut((0, 0), (full.port_dim(), nf)).copy_from(full.c());
    c_e.view_mut((0, nf), (full.port_dim(), nr))
        .copy_from(&(-reduced.c()));

    let we = lyapunov_solve(&a_e, &(&b_e * b_e.transpose()))?;
    let absolute = (&c_e * &we * c_e.transpose()).trace().max(0.0).sqrt();

    // The (1,1) Gramian block of the error system is exactly the full
    // model's controllability Gramian, so the reference norm is free.
    let wc_full = we.view((0, 0), (nf, nf));
    let full_norm = (full.c() * wc_full * full.c().transpose())
        .trace()
        .max(0.0)
        .sqrt();
    let relative = if full_norm > 0.0 {
        absolute / full_norm
    } else {
        f64::INFINITY
    };
    Ok(H2Error { absolute, relative })
}

/// Transmission zeros `eig(A - B D^{-1} C)` for invertible feed-through.
pub fn transmission_zeros(model: &StateSpaceModel) -> Result<Vec<Complex64>> {
    let x = linalg::solve_real(model.d().clone(), model.c()).ok_or_else(|| {
        Error::ContractViolation("feed-through is singular: transmission zeros undefined".into())
    })?;
    let mut zeros = linalg::eigenvalues(&(model.a() - model.b() * x))?;
    zeros.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Ok(zeros)
}

/// Interpolation residual at one mirrored reduced pole.
#[derive(Debug, Clone, Copy)]
pub struct InterpolationEntry {
    /// Reduced pole `λ_i`.
    pub pole: Complex64,
    /// Mirror point `-conj(λ_i)` where the conditions are evaluated.
    pub mirror: Complex64,
    /// `‖(H - Ĥ)(μ_i) b_i‖_2` with unit residue input direction `b_i`.
    pub right: f64,
    /// `‖c_i^T (H - Ĥ)(μ_i)‖_2` with unit residue output direction `c_i`.
    pub left: f64,
    /// `|c_i^T (H' - Ĥ')(μ_i) b_i|`.
    pub bitangential: f64,
}

/// All interpolation residuals of a reduction, plus a reliability verdict.
#[derive(Debug, Clone)]
pub struct InterpolationDiagnostics {
    pub entries: Vec<InterpolationEntry>,
    /// False when poles are numerically multiple or the spectral basis is
    /// near defective; the residue directions are then ill-determined.
    pub reliable: bool,
}

impl InterpolationDiagnostics {
    /// Largest residual over all entries and all three condition types.
    pub fn max_residual(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.right.max(e.left).max(e.bitangential))
            .fold(0.0, f64::max)
    }
}

/// A few inverse-iteration steps with a deterministically nudged shift;
/// enough to recover an eigenvector of a small well-separated spectrum.
fn inverse_iteration(m: &DMatrix<Complex64>, lambda: Complex64) -> Result<DVector<Complex64>> {
    let dim = m.nrows();
    let mut v = DVector::from_fn(dim, |j, _| {
        Complex64::new(((j + 1) as f64).sin(), ((j + 1) as f64).cos())
    });
    v /= Complex64::new(v.norm(), 0.0);

    let mut nudge = 1e-10 * (1.0 + lambda.norm());
    for _ in 0..6 {
        let mut shifted = m.clone();
        for k in 0..dim {
            shifted[(k, k)] -= lambda + Complex64::new(nudge, 0.0);
        }
        if let Some(lu_ok) = {
            let lu = shifted.lu();
            // Inverse iteration *wants* a nearly singular solve; only an
            // exactly breaking factorization forces a larger nudge.
            lu.solve(&v)
        } {
            let norm = lu_ok.norm();
            if norm.is_finite() && norm > 0.0 {
                v = lu_ok / Complex64::new(norm, 0.0);
                // Two refinement passes are ample at these separations.
                for _ in 0..2 {
                    let mut shifted = m.clone();
                    for k in 0..dim {
                        shifted[(k, k)] -= lambda + Complex64::new(nudge, 0.0);
                    }
                    if let Some(next) = shifted.lu().solve(&v) {
                        let n2 = next.norm();
                        if n2.is_finite() && n2 > 0.0 {
                            v = next / Complex64::new(n2, 0.0);
                        }
                    }
                }
                return Ok(v);
            }
        }
        nudge *= 100.0;
    }
    Err(Error::NumericalBreakdown(
        "inverse iteration failed to recover an eigenvector".into(),
    ))
}

/// Residuals of the first-order H2 interpolation conditions at the
/// mirrored reduced poles `μ_i = -conj(λ_i)`.
///
/// Residue directions come from the spectral decomposition of the reduced
/// drift (eigenvectors via inverse iteration); each is normalized, so the
/// residuals compare across poles.  Poles closer than `1e-8` relative to
/// the spectral radius, or near-defective eigenbases, clear the `reliable`
/// flag — the conditions are still reported but the directions are
/// ill-determined.
pub fn interpolation_residuals(
    full: &StateSpaceModel,
    reduced: &StateSpaceModel,
) -> Result<InterpolationDiagnostics> {
    if full.port_dim() != reduced.port_dim() {
        return Err(Error::InvalidDimension(format!(
            "port dimensions differ ({} vs {})",
            full.port_dim(),
            reduced.port_dim()
        )));
    }
    let mut poles = linalg::eigenvalues(reduced.a())?;
    poles.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));

    let scale = poles.iter().map(|l| l.norm()).fold(0.0f64, f64::max);
    let mut reliable = true;
    for i in 0..poles.len() {
        for j in (i + 1)..poles.len() {
            if (poles[i] - poles[j]).norm() < 1e-8 * scale.max(1e-300) {
                reliable = false;
            }
        }
    }

    let a_c = linalg::to_complex(reduced.a());
    let a_ct = a_c.transpose();
    let b_c = linalg::to_complex(reduced.b());
    let c_c = linalg::to_complex(reduced.c());

    let mut entries = Vec::with_capacity(poles.len());
    for lambda in &poles {
        let v = inverse_iteration(&a_c, *lambda)?;
        let y = inverse_iteration(&a_ct, *lambda)?;
        let denom: Complex64 = y.dot(&v); // y^T v (unconjugated)
        if denom.norm() < 1e-10 {
            reliable = false;
        }

        // Residue directions of Ĥ at λ: output c_i = C_r v, input from the
        // left eigenrow w̃^T = y^T / (y^T v): b_i^T = w̃^T B_r.
        let c_dir = &c_c * &v;
        let w_row = if denom.norm() > 0.0 {
            y.map(|x| x / denom)
        } else {
            y.clone()
        };
        let b_dir = b_c.tr_mul(&w_row);

        let c_unit = unit_or_zero(&c_dir);
        let b_unit = unit_or_zero(&b_dir);

        let mirror = Complex64::new(-lambda.re, lambda.im);
        let h = full.transfer_eval(mirror)?;
        let h_r = reduced.transfer_eval(mirror)?;
        let delta = &h - &h_r;

        let dh = transfer_derivative(full, mirror)?;
        let dh_r = transfer_derivative(reduced, mirror)?;
        let ddelta = &dh - &dh_r;

        let right = (&delta * &b_unit).norm();
        let left = (delta.tr_mul(&c_unit)).norm();
        let bitangential = (c_unit.transpose() * &ddelta * &b_unit)[(0, 0)].norm();

        entries.push(InterpolationEntry {
            pole: *lambda,
            mirror,
            right,
            left,
            bitangential,
        });
    }

    Ok(InterpolationDiagnostics { entries, reliable })
}

fn unit_or_zero(v: &DVector<Complex64>) -> DVector<Complex64> {
    let n = v.norm();
    if n > 0.0 {
        v / Complex64::new(n, 0.0)
    } else {
        v.clone()
    }
}

/// `H'(s) = -C (sI - A)^{-2} B` via two shifted solves.
fn transfer_derivative(model: &StateSpaceModel, s: Complex64) -> Result<DMatrix<Complex64>> {
    let dim = model.state_dim();
    let mut shifted = linalg::to_complex(model.a());
    shifted.neg_mut();
    for i in 0..dim {
        shifted[(i, i)] += s;
    }
    let rhs = linalg::to_complex(model.b());
    let lu = shifted.lu();
    let x = lu.solve(&rhs).ok_or(Error::NearPole)?;
    let xx = lu.solve(&x).ok_or(Error::NearPole)?;
    Ok(-(linalg::to_complex(model.c()) * xx))
}
