//! Quadrature IRKA: an H2-targeted fixed-point iteration over interpolation
//! shifts, with every projection step carried out symplectically so the
//! reduced models stay physically realizable.
//!
//! One iteration maps a shift set `σ` to the mirrored reduced spectrum:
//!
//! 1. solve `(A - σ_i I) z = B t_ℓ` for every shift/direction combination,
//!    splitting complex solutions into real and imaginary parts;
//! 2. compress the candidate pool with paired `J`-orthogonal Gram–Schmidt
//!    and normalize the pairing to `J_r`;
//! 3. project, read off the reduced spectrum, and mirror it
//!    (`σ ← -conj(λ)`) for the next sweep.
//!
//! The loop stops when the canonical shift vector changes by less than a
//! relative tolerance, or after a bounded number of iterations (returning
//! the best iterate seen, flagged as non-converged).

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::canonical::CanonicalStructure;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::StateSpaceModel;
use crate::projection::{
    pairing, project, structural_diagnostics, symplectic_gram_schmidt, symplectic_normalize,
    test_basis, CandidatePool, ColumnPart, ColumnProvenance, ProjectionPair,
};

/// A shift multiset kept in canonical order: ascending imaginary part, ties
/// broken by ascending real part.  The ordering makes shift vectors from
/// different iterations comparable entry by entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSet {
    sigma: Vec<Complex64>,
}

impl ShiftSet {
    /// Takes ownership of the shifts and sorts them canonically.
    pub fn new(mut sigma: Vec<Complex64>) -> Self {
        sigma.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        Self { sigma }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.sigma
    }

    /// Euclidean norm of the shift vector.
    pub fn norm(&self) -> f64 {
        self.sigma
            .iter()
            .map(|s| s.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Tangential directions cycling through the canonical port basis.
#[derive(Debug, Clone)]
pub struct TangentialPool {
    port_dim: usize,
    directions: Vec<DVector<f64>>,
}

impl TangentialPool {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn direction(&self, i: usize) -> &DVector<f64> {
        &self.directions[i]
    }

    pub fn port_dim(&self) -> usize {
        self.port_dim
    }
}

/// `l` canonical unit directions in the `2m`-dimensional port space,
/// cycling `e_1, e_2, ..., e_{2m}, e_1, ...`.
pub fn tangential_directions(m: usize, l: usize) -> TangentialPool {
    assert!(m >= 1, "channel count must be positive");
    let port_dim = 2 * m;
    let directions = (0..l)
        .map(|i| {
            let mut e = DVector::zeros(port_dim);
            e[i % port_dim] = 1.0;
            e
        })
        .collect();
    TangentialPool {
        port_dim,
        directions,
    }
}

/// How the first shift set is chosen.
#[derive(Debug, Clone)]
pub enum InitStrategy {
    /// `r` real shifts log-spaced inside a window derived from `‖A‖_∞`.
    LogSpacedReal,
    /// Caller-provided shifts (stored canonically ordered).
    UserProvided(Vec<Complex64>),
}

/// Engine configuration.  `r` is the reduced mode-pair count; all other
/// fields have working defaults from [`QirkaConfig::new`].
#[derive(Debug, Clone)]
pub struct QirkaConfig {
    /// Reduced mode pairs `r ≥ 1`.
    pub r: usize,
    /// Tangential directions per shift; defaults to `r` when `None`.
    pub directions_per_shift: Option<usize>,
    /// Relative stopping tolerance on the shift change.
    pub epsilon: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Gram–Schmidt deflation tolerance.
    pub tau: f64,
    /// Initial shift strategy.
    pub init: InitStrategy,
}

impl QirkaConfig {
    /// Defaults: `L = r`, `ε = 1e-6`, 100 iterations, `τ = 1e-12`,
    /// log-spaced real initial shifts.
    pub fn new(r: usize) -> Self {
        Self {
            r,
            directions_per_shift: None,
            epsilon: 1e-6,
            max_iter: 100,
            tau: 1e-12,
            init: InitStrategy::LogSpacedReal,
        }
    }

    /// Effective tangential direction count.
    pub fn directions(&self) -> usize {
        self.directions_per_shift.unwrap_or(self.r)
    }

    fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidConfig(
                "reduced order must be at least one mode pair".into(),
            ));
        }
        if self.directions() == 0 {
            return Err(Error::InvalidConfig(
                "at least one tangential direction per shift is required".into(),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(
                "stopping tolerance must be positive".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig(
                "iteration cap must be at least one".into(),
            ));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidConfig(
                "deflation tolerance must be positive".into(),
            ));
        }
        if let InitStrategy::UserProvided(shifts) = &self.init {
            if shifts.len() != self.r {
                return Err(Error::InvalidConfig(format!(
                    "expected {} initial shifts, got {}",
                    self.r,
                    shifts.len()
                )));
            }
        }
        Ok(())
    }
}

/// Per-iteration measurements.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// Relative change of the canonical shift vector produced by this
    /// iteration with respect to the one it started from.
    pub relative_change: f64,
    /// `‖V^T J_n V - J_r‖_F`.
    pub symplectic_defect: f64,
    /// `‖U V - I‖_F`.
    pub biorthogonality_defect: f64,
    /// `(‖R1‖_F, ‖R2‖_F, ‖R3‖_F)` of the projected (monitor) model.
    pub pr_defects: [f64; 3],
    /// Shifts the iteration started from (canonical order).
    pub shifts: Vec<Complex64>,
    /// Reduced spectrum of this iterate.
    pub reduced_poles: Vec<Complex64>,
    /// Wall-clock seconds spent in this iteration.
    pub elapsed_seconds: f64,
}

/// Full iteration history of one engine run.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    /// Whether the stopping tolerance was met within the iteration cap.
    pub converged: bool,
    /// Index of the returned iterate in `records`.
    pub selected: usize,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Total wall-clock seconds across all iterations.
    pub fn total_seconds(&self) -> f64 {
        self.records.iter().map(|r| r.elapsed_seconds).sum()
    }
}

/// Output of a full engine run.
#[derive(Debug, Clone)]
pub struct QirkaOutcome {
    pub reduced: StateSpaceModel,
    pub pair: ProjectionPair,
    pub trace: IterationTrace,
}

/// Builds the candidate pool for one shift set: for each shift `σ_i` one LU
/// factorization of `(A - σ_i I)` solves all tangential right-hand sides
/// `B t_ℓ`.  Real shifts contribute one real column per direction; complex
/// shifts contribute the real and imaginary parts of the complex solution.
pub fn candidate_pool(
    model: &StateSpaceModel,
    shifts: &ShiftSet,
    directions: &TangentialPool,
) -> Result<CandidatePool> {
    if !directions.is_empty() && directions.port_dim() != model.port_dim() {
        return Err(Error::InvalidDimension(format!(
            "directions live in dimension {}, model ports have dimension {}",
            directions.port_dim(),
            model.port_dim()
        )));
    }
    let dim = model.state_dim();
    let mut pool = CandidatePool::new(dim);
    if directions.is_empty() {
        return Ok(pool);
    }

    // All tangential right-hand sides at once: column ℓ is B t_ℓ.
    let mut rhs = DMatrix::zeros(dim, directions.len());
    for l in 0..directions.len() {
        rhs.set_column(l, &(model.b() * directions.direction(l)));
    }

    for (i, sigma) in shifts.as_slice().iter().enumerate() {
        if sigma.im == 0.0 {
            let mut shifted = model.a().clone();
            for k in 0..dim {
                shifted[(k, k)] -= sigma.re;
            }
            let sol = linalg::solve_real(shifted, &rhs)
                .ok_or(Error::ShiftCollision { shift: *sigma })?;
            for l in 0..directions.len() {
                pool.push(
                    sol.column(l).into_owned(),
                    ColumnProvenance {
                        shift_index: i,
                        direction_index: l,
                        part: ColumnPart::Real,
                    },
                );
            }
        } else {
            let mut shifted = linalg::to_complex(model.a());
            for k in 0..dim {
                shifted[(k, k)] -= sigma;
            }
            let rhs_c = linalg::to_complex(&rhs);
            let sol = linalg::solve_complex(shifted, &rhs_c)
                .ok_or(Error::ShiftCollision { shift: *sigma })?;
            for l in 0..directions.len() {
                let col = sol.column(l);
                pool.push(
                    DVector::from_fn(dim, |k, _| col[k].re),
                    ColumnProvenance {
                        shift_index: i,
                        direction_index: l,
                        part: ColumnPart::Real,
                    },
                );
                pool.push(
                    DVector::from_fn(dim, |k, _| col[k].im),
                    ColumnProvenance {
                        shift_index: i,
                        direction_index: l,
                        part: ColumnPart::Imag,
                    },
                );
            }
        }
    }
    Ok(pool)
}

/// Next shift set from a reduced drift matrix: keep one representative per
/// conjugate pair (`Im λ ≥ 0`), order them by (imaginary, real) part, take
/// the first `r`, and mirror (`σ = -conj(λ)`).  If fewer than `r`
/// representatives exist the real eigenvalues are reused in order of
/// decreasing magnitude.
pub fn select_shifts(a_r: &DMatrix<f64>) -> Result<ShiftSet> {
    if a_r.nrows() != a_r.ncols() || a_r.nrows() == 0 || a_r.nrows() % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "reduced drift must be square with even positive size, got {}x{}",
            a_r.nrows(),
            a_r.ncols()
        )));
    }
    let r = a_r.nrows() / 2;
    let eigs = linalg::eigenvalues(a_r)?;

    let mut upper: Vec<Complex64> = eigs.iter().copied().filter(|l| l.im >= 0.0).collect();
    upper.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    upper.truncate(r);

    if upper.len() < r {
        // Defensive fill: a 2r-point real spectrum always yields at least r
        // representatives, so this only triggers on degenerate inputs.
        let mut reals: Vec<Complex64> = eigs.iter().copied().filter(|l| l.im == 0.0).collect();
        reals.sort_by(|a, b| b.re.abs().total_cmp(&a.re.abs()));
        if reals.is_empty() {
            return Err(Error::NumericalBreakdown(
                "reduced spectrum yielded no usable shift representatives".into(),
            ));
        }
        let mut k = 0;
        while upper.len() < r {
            upper.push(reals[k % reals.len()]);
            k += 1;
        }
    }

    Ok(ShiftSet::new(
        upper.iter().map(|l| Complex64::new(-l.re, l.im)).collect(),
    ))
}

/// Relative change `‖σ_new - σ_old‖_2 / max(1, ‖σ_old‖_2)` between two
/// canonical shift vectors of equal length.
pub fn relative_change(new: &ShiftSet, old: &ShiftSet) -> Result<f64> {
    if new.len() != old.len() {
        return Err(Error::ContractViolation(format!(
            "shift sets have different lengths ({} vs {})",
            new.len(),
            old.len()
        )));
    }
    let diff: f64 = new
        .as_slice()
        .iter()
        .zip(old.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(diff / old.norm().max(1.0))
}

/// `count` values log-spaced inclusively between `lo` and `hi`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 1);
    if count == 1 {
        return vec![(lo * hi).sqrt()];
    }
    let ratio = hi / lo;
    (0..count)
        .map(|i| lo * ratio.powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Initial shift set for a model.  The log-spaced strategy derives its
/// window from `g = ‖A‖_∞` (maximum absolute row sum): `r` real shifts
/// between `max(1e-3, 0.01 g)` and `10 g`, or the geometric midpoint when
/// `r = 1`.
pub fn initial_shifts(
    model: &StateSpaceModel,
    r: usize,
    strategy: &InitStrategy,
) -> Result<ShiftSet> {
    if r == 0 {
        return Err(Error::InvalidConfig(
            "reduced order must be at least one mode pair".into(),
        ));
    }
    match strategy {
        InitStrategy::UserProvided(shifts) => {
            if shifts.len() != r {
                return Err(Error::InvalidConfig(format!(
                    "expected {} initial shifts, got {}",
                    r,
                    shifts.len()
                )));
            }
            Ok(ShiftSet::new(shifts.clone()))
        }
        InitStrategy::LogSpacedReal => {
            let a = model.a();
            let mut g = 0.0f64;
            for i in 0..a.nrows() {
                let row_sum: f64 = (0..a.ncols()).map(|j| a[(i, j)].abs()).sum();
                g = g.max(row_sum);
            }
            let lo = (0.01 * g).max(1e-3);
            let hi = 10.0 * g;
            if !(hi > lo) {
                return Err(Error::InvalidConfig(format!(
                    "degenerate shift window [{lo:.3e}, {hi:.3e}] derived from ‖A‖_∞ = {g:.3e}"
                )));
            }
            Ok(ShiftSet::new(
                log_spaced(lo, hi, r)
                    .into_iter()
                    .map(|s| Complex64::new(s, 0.0))
                    .collect(),
            ))
        }
    }
}

/// Runs the engine on `model`; see [`run_with_monitor`].
pub fn run(model: &StateSpaceModel, config: &QirkaConfig) -> Result<QirkaOutcome> {
    run_with_monitor(model, None, config)
}

/// Runs the engine on `model`, tracing realizability against `monitor`.
///
/// `monitor`, when given, must share the state dimension of `model`; every
/// iteration projects it with the same `(V, U)` pair and records the
/// physical-realizability defects of that projection.  This is how
/// externally driven subsystems (whose own realization is intentionally not
/// realizable) are monitored through their full-port dilation.  Without a
/// monitor the defects are those of the projected `model` itself.
pub fn run_with_monitor(
    model: &StateSpaceModel,
    monitor: Option<&StateSpaceModel>,
    config: &QirkaConfig,
) -> Result<QirkaOutcome> {
    config.validate()?;
    if let Some(mon) = monitor {
        if mon.state_dim() != model.state_dim() {
            return Err(Error::InvalidDimension(format!(
                "monitor state dimension {} differs from model state dimension {}",
                mon.state_dim(),
                model.state_dim()
            )));
        }
    }

    // Realizability is judged on the monitor dilation when one is given;
    // an externally driven subsystem is expected to be non-realizable on
    // its own.
    let reference = monitor.unwrap_or(model);
    let residual = reference.pr_residuals().max_norm();
    if residual > 1e-8 {
        log::warn!(
            "input model is not physically realizable (residual {residual:.3e}); \
             reduction proceeds on the given realization"
        );
    }
    match model.stability_margin() {
        Ok(margin) if margin >= 0.0 => {
            log::warn!("input drift is not Hurwitz (spectral abscissa {margin:.3e})");
        }
        _ => {}
    }

    let jn = CanonicalStructure::new(model.mode_count())?;
    let jr = CanonicalStructure::new(config.r)?;
    let directions = tangential_directions(model.channel_count(), config.directions());
    let mut sigma = initial_shifts(model, config.r, &config.init)?;

    let mut records: Vec<IterationRecord> = Vec::new();
    let mut best: Option<(f64, usize, StateSpaceModel, ProjectionPair)> = None;

    for _ in 0..config.max_iter {
        let started = Instant::now();

        // Candidate pool, with a single deterministic retry after a shift
        // collision: the offending shift is nudged by 1e-6·(1+|σ|) along
        // the real axis, then a second collision is a hard failure.
        let pool = match candidate_pool(model, &sigma, &directions) {
            Ok(pool) => pool,
            Err(Error::ShiftCollision { shift }) => {
                let nudged: Vec<Complex64> = sigma
                    .as_slice()
                    .iter()
                    .map(|s| {
                        if *s == shift {
                            Complex64::new(s.re + 1e-6 * (1.0 + s.norm()), s.im)
                        } else {
                            *s
                        }
                    })
                    .collect();
                sigma = ShiftSet::new(nudged);
                candidate_pool(model, &sigma, &directions)?
            }
            Err(e) => return Err(e),
        };

        let w = symplectic_gram_schmidt(&pool, &jn, config.r, config.tau)?;
        let s = pairing(&w, &jn);
        let normalization = symplectic_normalize(&w, &s)?;
        let u = test_basis(&normalization.v, &jn, &jr)?;
        let pair = ProjectionPair::new(normalization.v, u, &jn)?;
        let reduced = project(model, &pair)?;

        // Realizability is judged on the monitor dilation when present.
        let diagnostics = match monitor {
            Some(mon) => structural_diagnostics(&pair, &project(mon, &pair)?),
            None => structural_diagnostics(&pair, &reduced),
        };

        let reduced_poles = linalg::eigenvalues(reduced.a())?;
        let proposed = select_shifts(reduced.a())?;
        let relchg = relative_change(&proposed, &sigma)?;

        records.push(IterationRecord {
            relative_change: relchg,
            symplectic_defect: diagnostics.symplectic_defect,
            biorthogonality_defect: diagnostics.biorthogonality_defect,
            pr_defects: diagnostics.pr_defects,
            shifts: sigma.as_slice().to_vec(),
            reduced_poles,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        });
        let index = records.len() - 1;
        if best.as_ref().map_or(true, |(b, ..)| relchg < *b) {
            best = Some((relchg, index, reduced, pair));
        }

        if relchg < config.epsilon {
            let (_, selected, reduced, pair) = best.expect("at least one iterate recorded");
            return Ok(QirkaOutcome {
                reduced,
                pair,
                trace: IterationTrace {
                    records,
                    converged: true,
                    selected,
                },
            });
        }

        // Mirrored shifts of an unstable reduced iterate are reflected back
        // into the right half plane so the next shifted solves stay away
        // from the imaginary axis.
        sigma = ShiftSet::new(
            proposed
                .as_slice()
                .iter()
                .map(|s| Complex64::new(s.re.abs(), s.im))
                .collect(),
        );
    }

    let (_, selected, reduced, pair) = best.expect("iteration cap is at least one");
    log::warn!(
        "shift iteration did not meet tolerance {:.1e} within {} iterations; \
         returning iterate {} (relative change {:.3e})",
        config.epsilon,
        config.max_iter,
        selected + 1,
        records[selected].relative_change
    );
    Ok(QirkaOutcome {
        reduced,
        pair,
        trace: IterationTrace {
            records,
            converged: false,
            selected,
        },
    })
}
