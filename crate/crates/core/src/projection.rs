//! Symplectic Petrov–Galerkin projection.
//!
//! Given a trial basis `V ∈ R^{2n×2r}` with symplectic columns
//! (`V^T J_n V = J_r`), the test basis
//!
//! ```text
//! U = J_r^{-1} V^T J_n = J_r^T V^T J_n
//! ```
//!
//! satisfies `U V = I` and `V J_r = J_n U^T`, and the reduced model
//! `(U A V, U B, C V, D)` inherits the physical-realizability residuals of
//! the full model: `R1_r = U R1 U^T` and `R2_r = U R2`.  This module builds
//! such bases from candidate vectors: paired `J`-orthogonal Gram–Schmidt,
//! skew-pairing normalization through the real Schur form, test-basis
//! assembly, projection, and the structural diagnostics used to monitor all
//! of it.

use nalgebra::{DMatrix, DVector};

use crate::canonical::CanonicalStructure;
use crate::error::{Error, Result};
use crate::model::StateSpaceModel;

/// Which part of a complex solve a candidate column came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnPart {
    Real,
    Imag,
}

/// Provenance of one candidate column: which shift and tangential direction
/// produced it, and whether it is the real or imaginary part of the solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnProvenance {
    pub shift_index: usize,
    pub direction_index: usize,
    pub part: ColumnPart,
}

/// Ordered pool of real candidate vectors for the trial basis.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    state_dim: usize,
    columns: Vec<DVector<f64>>,
    provenance: Vec<ColumnProvenance>,
}

impl CandidatePool {
    /// Empty pool for vectors of length `state_dim`.
    pub fn new(state_dim: usize) -> Self {
        Self {
            state_dim,
            columns: Vec::new(),
            provenance: Vec::new(),
        }
    }

    /// Appends a column with its provenance tag.
    pub fn push(&mut self, column: DVector<f64>, provenance: ColumnProvenance) {
        assert_eq!(
            column.nrows(),
            self.state_dim,
            "candidate column has wrong length"
        );
        self.columns.push(column);
        self.provenance.push(provenance);
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn column(&self, i: usize) -> &DVector<f64> {
        &self.columns[i]
    }

    pub fn provenance(&self, i: usize) -> ColumnProvenance {
        self.provenance[i]
    }
}

/// `J`-orthogonal residual of `w` against the accepted columns:
/// `w - W (W^T J_n W)^{-1} W^T J_n w`.  A singular pairing among the
/// accepted columns is reported as a degenerate pairing.
fn j_orthogonal_residual(
    w: &DVector<f64>,
    accepted: &[DVector<f64>],
    jn: &CanonicalStructure,
) -> Result<DVector<f64>> {
    if accepted.is_empty() {
        return Ok(w.clone());
    }
    let basis = DMatrix::from_columns(accepted);
    let s = basis.tr_mul(&jn.left_mul(&basis)); // W^T J_n W
    let rhs = basis.tr_mul(&DMatrix::from_columns(&[jn.apply_vec(w)]));
    let scale = s.norm();
    let lu = s.lu();
    let min_pivot = lu
        .u()
        .diagonal()
        .iter()
        .map(|p| p.abs())
        .fold(f64::INFINITY, f64::min);
    if min_pivot <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegeneratePairing {
            min_alpha: min_pivot,
        });
    }
    let coeffs = lu.solve(&rhs).ok_or(Error::DegeneratePairing {
        min_alpha: min_pivot,
    })?;
    Ok(w - basis * coeffs.column(0))
}

/// Paired symplectic Gram–Schmidt sweep over a candidate pool.
///
/// Candidates are consumed in order.  Each candidate is `J`-orthogonalized
/// against the accepted columns; if the residual norm is at most `tau` the
/// candidate is discarded, otherwise the normalized residual `v` and its
/// conjugate partner `J_n^T v` are appended as a pair and re-orthogonalized
/// once more against the previously accepted columns.  The sweep stops as
/// soon as `2r` columns are accepted and fails with
/// [`Error::InsufficientPool`] if the pool runs out first.
pub fn symplectic_gram_schmidt(
    pool: &CandidatePool,
    jn: &CanonicalStructure,
    r: usize,
    tau: f64,
) -> Result<DMatrix<f64>> {
    if r == 0 {
        return Err(Error::InvalidDimension(
            "reduced order must be at least one mode pair".into(),
        ));
    }
    if !(tau > 0.0) {
        return Err(Error::ContractViolation(
            "deflation tolerance must be positive".into(),
        ));
    }
    if pool.state_dim() != jn.dim() {
        return Err(Error::InvalidDimension(format!(
            "pool vectors have length {}, structure has dimension {}",
            pool.state_dim(),
            jn.dim()
        )));
    }
    let needed = 2 * r;
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(needed);

    'candidates: for idx in 0..pool.len() {
        if cols.len() == needed {
            break;
        }
        let resid = j_orthogonal_residual(pool.column(idx), &cols, jn)?;
        let norm = resid.norm();
        if norm <= tau {
            continue; // numerically dependent candidate
        }
        let v = resid / norm;
        let u = jn.apply_vec_t(&v);
        let prev = cols.len();
        cols.push(v);
        cols.push(u);

        // One re-orthogonalization pass of the fresh pair against the
        // previously accepted columns keeps the pairing crisp after many
        // accepted directions.  If either refreshed column collapses, the
        // candidate cannot be extended to a conjugate pair: roll it back.
        if prev > 0 {
            for t in prev..prev + 2 {
                let refreshed = j_orthogonal_residual(&cols[t], &cols[..prev], jn)?;
                let norm = refreshed.norm();
                if norm <= tau {
                    cols.truncate(prev);
                    continue 'candidates;
                }
                cols[t] = refreshed / norm;
            }
        }
    }

    if cols.len() < needed {
        return Err(Error::InsufficientPool {
            accepted: cols.len(),
            needed,
        });
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Skew pairing `S = (W^T J_n W - (W^T J_n W)^T) / 2` of a trial basis.
/// The explicit antisymmetrization removes roundoff asymmetry so the Schur
/// step downstream sees an exactly skew matrix.
#[derive(Debug, Clone)]
pub struct PairingMatrix {
    s: DMatrix<f64>,
}

impl PairingMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }
}

/// Computes the (antisymmetrized) pairing of the columns of `w`.
pub fn pairing(w: &DMatrix<f64>, jn: &CanonicalStructure) -> PairingMatrix {
    let raw = w.tr_mul(&jn.left_mul(w));
    let s = 0.5 * (&raw - raw.transpose());
    PairingMatrix { s }
}

/// Result of normalizing a trial basis to exact canonical pairing.
#[derive(Debug, Clone)]
pub struct SymplecticNormalization {
    /// The normalized trial basis `V = W T`.
    pub v: DMatrix<f64>,
    /// The congruence factor `T` with `T^T S T = J_r`.
    pub t: DMatrix<f64>,
    /// Canonical block weights `α_j > 0` of the skew pairing.
    pub schur_blocks: Vec<f64>,
}

/// Brings a paired basis `W` to canonical pairing via the real Schur form
/// of its skew pairing `S`: with `Q^T S Q = blkdiag([[0, α_j], [-α_j, 0]])`
/// (signs fixed by swapping block columns so every `α_j > 0`), the factor
/// `T = Q · blkdiag(α_j^{-1/2} I_2)` gives `V = W T` with
/// `V^T J_n V = J_r` up to roundoff.
///
/// A pairing whose smallest block weight is below `1e-10` times the largest
/// is reported as degenerate.
pub fn symplectic_normalize(
    w: &DMatrix<f64>,
    pairing: &PairingMatrix,
) -> Result<SymplecticNormalization> {
    let dim = pairing.dim();
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "pairing must have even positive dimension, got {dim}"
        )));
    }
    if w.ncols() != dim {
        return Err(Error::InvalidDimension(format!(
            "basis has {} columns, pairing has dimension {}",
            w.ncols(),
            dim
        )));
    }
    let s = pairing.matrix();
    let scale = s.norm();
    if scale == 0.0 {
        return Err(Error::DegeneratePairing { min_alpha: 0.0 });
    }

    let (mut q, t) = crate::linalg::schur(s)?;

    // Parse the quasi-triangular factor into 1x1 and 2x2 diagonal blocks.
    // For an exactly skew input the 2x2 blocks are [[0, α], [-α, 0]] up to
    // roundoff and 1x1 blocks correspond to zero eigenvalues.
    let block_tol = 100.0 * f64::EPSILON * scale;
    let mut alphas: Vec<f64> = Vec::with_capacity(dim / 2);
    let mut starts: Vec<usize> = Vec::with_capacity(dim / 2);
    let mut degenerate_1x1 = false;
    let mut i = 0;
    while i < dim {
        let coupled = i + 1 < dim && t[(i + 1, i)].abs() > block_tol;
        if coupled {
            let mut alpha = 0.5 * (t[(i, i + 1)] - t[(i + 1, i)]);
            if alpha < 0.0 {
                // Swapping the block's two Schur columns flips the sign of
                // the pairing block, making the weight positive.
                q.swap_columns(i, i + 1);
                alpha = -alpha;
            }
            starts.push(i);
            alphas.push(alpha);
            i += 2;
        } else {
            degenerate_1x1 = true;
            i += 1;
        }
    }

    let max_alpha = alphas.iter().copied().fold(0.0f64, f64::max);
    let min_alpha = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    if degenerate_1x1 || alphas.is_empty() || min_alpha <= 1e-10 * max_alpha {
        return Err(Error::DegeneratePairing {
            min_alpha: if degenerate_1x1 || alphas.is_empty() {
                0.0
            } else {
                min_alpha
            },
        });
    }

    let mut factor = q;
    for (start, alpha) in starts.iter().zip(&alphas) {
        let scale = alpha.sqrt().recip();
        factor.column_mut(*start).scale_mut(scale);
        factor.column_mut(*start + 1).scale_mut(scale);
    }
    let v = w * &factor;
    Ok(SymplecticNormalization {
        v,
        t: factor,
        schur_blocks: alphas,
    })
}

/// Assembles the test basis `U = J_r^T V^T J_n` after verifying that `V`
/// has symplectic columns (`‖V^T J_n V - J_r‖_F ≤ 1e-8`).
pub fn test_basis(
    v: &DMatrix<f64>,
    jn: &CanonicalStructure,
    jr: &CanonicalStructure,
) -> Result<DMatrix<f64>> {
    if v.nrows() != jn.dim() || v.ncols() != jr.dim() {
        return Err(Error::InvalidDimension(format!(
            "trial basis is {}x{}, expected {}x{}",
            v.nrows(),
            v.ncols(),
            jn.dim(),
            jr.dim()
        )));
    }
    let defect = (v.tr_mul(&jn.left_mul(v)) - jr.matrix()).norm();
    if defect > 1e-8 {
        return Err(Error::NonSymplecticBasis { defect });
    }
    // U = J_r^T (V^T J_n); both factors are exact structural products.
    Ok(jr.left_mul_t(&jn.right_mul(&v.transpose())))
}

/// A trial/test basis pair with its structural defects.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    v: DMatrix<f64>,
    u: DMatrix<f64>,
    symplectic_defect: f64,
    biorthogonality_defect: f64,
    identity_defect: f64,
}

impl ProjectionPair {
    /// Wraps `(V, U)` and measures the three structural defects:
    /// `‖V^T J_n V - J_r‖_F`, `‖U V - I‖_F`, and `‖V J_r - J_n U^T‖_F`.
    pub fn new(v: DMatrix<f64>, u: DMatrix<f64>, jn: &CanonicalStructure) -> Result<Self> {
        if v.nrows() != jn.dim() || v.ncols() == 0 || v.ncols() % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "trial basis must be {}x(2r), got {}x{}",
                jn.dim(),
                v.nrows(),
                v.ncols()
            )));
        }
        if u.nrows() != v.ncols() || u.ncols() != v.nrows() {
            return Err(Error::InvalidDimension(format!(
                "test basis must be {}x{}, got {}x{}",
                v.ncols(),
                v.nrows(),
                u.nrows(),
                u.ncols()
            )));
        }
        let jr = CanonicalStructure::new(v.ncols() / 2)?;
        let symplectic_defect = (v.tr_mul(&jn.left_mul(&v)) - jr.matrix()).norm();
        let biorthogonality_defect =
            (&u * &v - DMatrix::<f64>::identity(u.nrows(), v.ncols())).norm();
        let identity_defect = (jr.right_mul(&v) - jn.left_mul(&u.transpose())).norm();
        Ok(Self {
            v,
            u,
            symplectic_defect,
            biorthogonality_defect,
            identity_defect,
        })
    }

    /// Builds the pair from a trial basis alone via [`test_basis`].
    pub fn from_trial_basis(v: DMatrix<f64>, jn: &CanonicalStructure) -> Result<Self> {
        if v.ncols() == 0 || v.ncols() % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "trial basis must have an even positive number of columns, got {}",
                v.ncols()
            )));
        }
        let jr = CanonicalStructure::new(v.ncols() / 2)?;
        let u = test_basis(&v, jn, &jr)?;
        Self::new(v, u, jn)
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// Reduced mode-pair count `r`.
    pub fn reduced_mode_count(&self) -> usize {
        self.v.ncols() / 2
    }

    /// `‖V^T J_n V - J_r‖_F`.
    pub fn symplectic_defect(&self) -> f64 {
        self.symplectic_defect
    }

    /// `‖U V - I‖_F`.
    pub fn biorthogonality_defect(&self) -> f64 {
        self.biorthogonality_defect
    }

    /// `‖V J_r - J_n U^T‖_F`.
    pub fn identity_defect(&self) -> f64 {
        self.identity_defect
    }
}

/// Petrov–Galerkin projection `(U A V, U B, C V, D)`.  The feed-through is
/// cloned bitwise.
pub fn project(model: &StateSpaceModel, pair: &ProjectionPair) -> Result<StateSpaceModel> {
    if model.state_dim() != pair.v().nrows() {
        return Err(Error::InvalidDimension(format!(
            "model has state dimension {}, basis has {} rows",
            model.state_dim(),
            pair.v().nrows()
        )));
    }
    let a_r = pair.u() * model.a() * pair.v();
    let b_r = pair.u() * model.b();
    let c_r = model.c() * pair.v();
    StateSpaceModel::new(a_r, b_r, c_r, model.d().clone())
}

/// Structural health of a projection step: basis defects plus the
/// physical-realizability residual norms of the projected model.
#[derive(Debug, Clone)]
pub struct StructuralDiagnostics {
    /// `‖V^T J_n V - J_r‖_F`.
    pub symplectic_defect: f64,
    /// `‖U V - I‖_F`.
    pub biorthogonality_defect: f64,
    /// `(‖R1‖_F, ‖R2‖_F, ‖R3‖_F)` of the projected model.
    pub pr_defects: [f64; 3],
}

impl StructuralDiagnostics {
    /// True when every defect is at most `tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.symplectic_defect <= tol
            && self.biorthogonality_defect <= tol
            && self.pr_defects.iter().all(|d| *d <= tol)
    }
}

/// Gathers the diagnostics for a projection pair and a reduced model that
/// was produced with it (for externally driven systems, pass the projected
/// full-port monitor model to track realizability of the closed dynamics).
pub fn structural_diagnostics(
    pair: &ProjectionPair,
    reduced: &StateSpaceModel,
) -> StructuralDiagnostics {
    let res = reduced.pr_residuals();
    StructuralDiagnostics {
        symplectic_defect: pair.symplectic_defect(),
        biorthogonality_defect: pair.biorthogonality_defect(),
        pr_defects: [res.r1_norm, res.r2_norm, res.r3_norm],
    }
}
