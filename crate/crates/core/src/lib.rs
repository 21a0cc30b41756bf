//! Structure-preserving H2 model reduction for linear quantum systems.
//!
//! Linear quantum systems in the quadrature picture are state-space models
//! `(A, B, C, D)` whose matrices satisfy the physical-realizability
//! constraints induced by the canonical commutation relations.  This crate
//! reduces such models while preserving that structure:
//!
//! * [`model`] — state-space models, physical-realizability residuals, the
//!   Hamiltonian/coupling template, and transfer-function evaluation;
//! * [`canonical`] — the canonical skew form `J = I ⊗ [[0,1],[-1,0]]` with
//!   exact structural products;
//! * [`projection`] — symplectic (J-orthogonal) Petrov–Galerkin projection:
//!   paired Gram–Schmidt, skew-pairing normalization, test-basis assembly,
//!   and structural diagnostics;
//! * [`qirka`] — the quadrature-IRKA fixed point iteration driving the shift
//!   selection for H2-optimal interpolation points;
//! * [`analysis`] — Lyapunov-based Gramians, Hankel singular values, H2
//!   norms and errors, transmission zeros, interpolation diagnostics;
//! * [`benchmarks`] — deterministic oscillator-chain, bosonic-Kitaev-chain,
//!   and passive-bus model generators;
//! * [`matio`] — plain-text matrix I/O used by the batch tools.

pub mod analysis;
pub mod benchmarks;
pub mod canonical;
pub mod error;
mod linalg;
pub mod matio;
pub mod model;
pub mod projection;
pub mod qirka;

pub use canonical::CanonicalStructure;
pub use error::{Error, Result};
pub use model::{pr_from_template, HamiltonianMatrix, PrResiduals, StateSpaceModel};
pub use projection::{
    pairing, project, structural_diagnostics, symplectic_gram_schmidt, symplectic_normalize,
    test_basis, CandidatePool, ColumnPart, ColumnProvenance, PairingMatrix, ProjectionPair,
    StructuralDiagnostics, SymplecticNormalization,
};
pub use qirka::{
    candidate_pool, initial_shifts, log_spaced, relative_change, run, run_with_monitor,
    select_shifts, tangential_directions, InitStrategy, IterationRecord, IterationTrace,
    QirkaConfig, QirkaOutcome, ShiftSet, TangentialPool,
};
