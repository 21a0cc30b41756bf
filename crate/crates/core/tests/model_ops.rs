//! Integration tests for the model layer: canonical structures, physical-
//! realizability residuals, template construction, transfer evaluation, and
//! the plain-text matrix format.

mod support;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qirka_core::{
    matio, pr_from_template, CanonicalStructure, Error, HamiltonianMatrix, StateSpaceModel,
};

// ---------------------------------------------------------------------------
// Canonical structure
// ---------------------------------------------------------------------------

#[test]
fn canonical_one_pair_entries() {
    let j = CanonicalStructure::new(1).unwrap();
    let m = j.matrix();
    assert_eq!(m[(0, 0)], 0.0);
    assert_eq!(m[(0, 1)], 1.0);
    assert_eq!(m[(1, 0)], -1.0);
    assert_eq!(m[(1, 1)], 0.0);
}

#[test]
fn canonical_is_orthogonal_and_skew() {
    for k in [1usize, 2, 5] {
        let j = CanonicalStructure::new(k).unwrap();
        let m = j.matrix();
        let eye = DMatrix::<f64>::identity(2 * k, 2 * k);
        // Exact integer arithmetic: no tolerances anywhere.
        assert_eq!(m * m.transpose(), eye);
        assert_eq!(m.transpose(), -m);
        assert_eq!(m * m, -eye);
        assert!(m.iter().all(|e| *e == 0.0 || *e == 1.0 || *e == -1.0));
    }
}

#[test]
fn canonical_rejects_zero_pairs() {
    assert!(matches!(
        CanonicalStructure::new(0),
        Err(Error::InvalidDimension(_))
    ));
}

// ---------------------------------------------------------------------------
// Realizability residuals
// ---------------------------------------------------------------------------

#[test]
fn template_models_have_roundoff_residuals() {
    let mut rng = support::rng(0x5eed_0001);
    for trial in 0..50 {
        let n = 1 + (trial % 6);
        let m = 1 + (trial % n.min(3));
        let model = support::rand_pr_model(&mut rng, n, m);
        let res = model.pr_residuals();
        let bound = 1e-13 * (1.0 + model.a().norm());
        assert!(
            res.max_norm() <= bound,
            "trial {trial}: residual {:.3e} exceeds {:.3e}",
            res.max_norm(),
            bound
        );
        // The sharper documented bound in terms of the coupling strength.
        let documented = 1e-12 * (1.0 + model.a().norm() + model.b().norm_squared());
        assert!(res.max_norm() <= documented);
    }
}

#[test]
fn identity_feedthrough_zeroes_r3_exactly() {
    let mut rng = support::rng(0x5eed_0002);
    let model = support::rand_pr_model(&mut rng, 3, 2);
    let res = model.pr_residuals();
    assert_eq!(res.r3_norm, 0.0);
    assert!(res.r3.iter().all(|e| *e == 0.0));
}

#[test]
fn r1_responds_exactly_to_drift_perturbations() {
    // R1 = A J + J Aᵀ + B J Bᵀ, so a drift perturbation E moves R1 by
    // E J + J Eᵀ = 2·skew(E J).  Two hand-checkable consequences:
    //   * E = εI  → change is exactly 2εJ (εJ from each term);
    //   * E = J H with H symmetric → E J = J H J is symmetric, change is 0:
    //     Hamiltonian perturbations never disturb the dissipation balance.
    let mut rng = support::rng(0x5eed_0003);
    let n = 4;
    let model = support::rand_pr_model(&mut rng, n, 2);
    let res = model.pr_residuals();
    let jn = CanonicalStructure::new(n).unwrap();

    let eps = 0.37;
    let mut shifted_a = model.a().clone();
    for i in 0..shifted_a.nrows() {
        shifted_a[(i, i)] += eps;
    }
    let shifted = StateSpaceModel::new(
        shifted_a,
        model.b().clone(),
        model.c().clone(),
        model.d().clone(),
    )
    .unwrap();
    let change = &shifted.pr_residuals().r1 - &res.r1;
    let expected = 2.0 * eps * jn.matrix();
    assert!(
        (&change - &expected).norm() <= 1e-12 * (1.0 + res.r1.norm()),
        "diagonal shift: expected exactly 2εJ, off by {:.3e}",
        (&change - &expected).norm()
    );

    let h = support::rand_symmetric(&mut rng, 2 * n, 1.0);
    let hamiltonian = StateSpaceModel::new(
        model.a() + jn.left_mul(&h),
        model.b().clone(),
        model.c().clone(),
        model.d().clone(),
    )
    .unwrap();
    let drift = (&hamiltonian.pr_residuals().r1 - &res.r1).norm();
    assert!(
        drift <= 1e-12 * (1.0 + h.norm() + res.r1.norm()),
        "Hamiltonian perturbation moved r1 by {drift:.3e}"
    );
}

#[test]
fn r1_is_skew_symmetric_up_to_roundoff() {
    let mut rng = support::rng(0x5eed_0004);
    for _ in 0..10 {
        let model = support::rand_pr_model(&mut rng, 3, 1);
        let res = model.pr_residuals();
        let sym = (&res.r1 + res.r1.transpose()).norm();
        assert!(sym <= 1e-12 * res.r1_norm + 1e-14);
    }
}

#[test]
fn r2_is_linear_in_output_perturbations() {
    // R2 = J Cᵀ + B J Dᵀ is affine in (C, D); differences of residuals must
    // therefore match the residuals of the differences.
    let mut rng = support::rng(0x5eed_0005);
    let model = support::rand_pr_model(&mut rng, 3, 2);
    let jn = CanonicalStructure::new(3).unwrap();

    let delta_c = support::rand_matrix(&mut rng, 4, 6, 0.5);
    let perturbed = StateSpaceModel::new(
        model.a().clone(),
        model.b().clone(),
        model.c() + &delta_c,
        model.d().clone(),
    )
    .unwrap();

    let base = model.pr_residuals();
    let bumped = perturbed.pr_residuals();
    let expected_change = jn.matrix() * delta_c.transpose();
    let got_change = &bumped.r2 - &base.r2;
    assert!((got_change - expected_change).norm() <= 1e-12 * (1.0 + delta_c.norm()));
}

// ---------------------------------------------------------------------------
// Template construction
// ---------------------------------------------------------------------------

#[test]
fn zero_coupling_template_is_pure_rotation() {
    let mut rng = support::rng(0x5eed_0006);
    let n = 3;
    let r = support::rand_symmetric(&mut rng, 2 * n, 1.0);
    let jn = CanonicalStructure::new(n).unwrap();
    let expected_a = jn.left_mul(&r);

    let model = pr_from_template(
        &HamiltonianMatrix::new(r).unwrap(),
        DMatrix::zeros(2 * n, 2),
    )
    .unwrap();
    assert_eq!(model.a(), &expected_a);
    assert!(model.c().iter().all(|e| *e == 0.0));
    assert_eq!(model.d(), &DMatrix::<f64>::identity(2, 2));
}

#[test]
fn single_damped_cavity_template() {
    // One mode, one channel, unit Hamiltonian, coupling √γ: the classic
    // damped cavity with A = J - (γ/2) I.
    let gamma = 1.7f64;
    let r = DMatrix::<f64>::identity(2, 2);
    let b = gamma.sqrt() * DMatrix::<f64>::identity(2, 2);
    let model = pr_from_template(&HamiltonianMatrix::new(r).unwrap(), b).unwrap();

    assert!(model.pr_residuals().max_norm() <= 1e-14);
    let j = CanonicalStructure::new(1).unwrap();
    let expected_a = j.matrix() - (gamma / 2.0) * DMatrix::<f64>::identity(2, 2);
    assert!((model.a() - expected_a).norm() <= 1e-14);
    let margin = model.stability_margin().unwrap();
    assert!((margin + gamma / 2.0).abs() <= 1e-12);
}

#[test]
fn template_r2_vanishes_for_any_coupling() {
    let mut rng = support::rng(0x5eed_0007);
    for _ in 0..20 {
        let model = support::rand_pr_model(&mut rng, 4, 3);
        let res = model.pr_residuals();
        assert!(res.r2_norm <= 1e-13 * (1.0 + model.b().norm_squared()));
    }
}

#[test]
fn asymmetric_hamiltonian_is_rejected() {
    let mut r = DMatrix::<f64>::identity(4, 4);
    r[(0, 1)] = 0.3; // no mirrored entry
    assert!(matches!(
        HamiltonianMatrix::new(r),
        Err(Error::ContractViolation(_))
    ));
}

// ---------------------------------------------------------------------------
// Transfer evaluation
// ---------------------------------------------------------------------------

#[test]
fn transfer_tends_to_feedthrough_at_high_frequency() {
    let mut rng = support::rng(0x5eed_0008);
    let model = support::rand_pr_model(&mut rng, 3, 2);
    let h = model.transfer_eval(Complex64::new(1e12, 0.0)).unwrap();
    let d = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| {
        Complex64::new(model.d()[(i, j)], 0.0)
    });
    assert!(support::complex_distance(&h, &d) <= 1e-6);
}

#[test]
fn transfer_hand_computed_resolvent() {
    // A = -I, B = C = D = I: H(1) = I (1·I + I)^{-1} I + I = 1.5 I.
    let eye = DMatrix::<f64>::identity(2, 2);
    let model = StateSpaceModel::new(-&eye, eye.clone(), eye.clone(), eye.clone()).unwrap();
    let h = model.transfer_eval(Complex64::new(1.0, 0.0)).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let expected = if i == j { 1.5 } else { 0.0 };
            assert!((h[(i, j)] - Complex64::new(expected, 0.0)).norm() <= 1e-14);
        }
    }
}

#[test]
fn transfer_matches_independent_elimination() {
    let mut rng = support::rng(0x5eed_0009);
    let model = support::rand_stable_pr_model(&mut rng, 3, 2);
    for s in [
        Complex64::new(0.0, 0.7),
        Complex64::new(0.0, -2.3),
        Complex64::new(1.5, 4.0),
        Complex64::new(0.2, 0.0),
    ] {
        let lib = model.transfer_eval(s).unwrap();
        let oracle = support::transfer_oracle(&model, s);
        let scale = oracle.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        assert!(
            support::complex_distance(&lib, &oracle) <= 1e-10 * (1.0 + scale),
            "mismatch at s = {s}"
        );
    }
}

#[test]
fn transfer_conjugate_symmetry() {
    let mut rng = support::rng(0x5eed_000a);
    let model = support::rand_pr_model(&mut rng, 4, 2);
    let s = Complex64::new(0.4, 1.9);
    let h = model.transfer_eval(s).unwrap();
    let h_conj = model.transfer_eval(s.conj()).unwrap();
    let scale = h.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let mut diff = 0.0f64;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            diff = diff.max((h_conj[(i, j)] - h[(i, j)].conj()).norm());
        }
    }
    assert!(diff <= 1e-12 * (1.0 + scale));
}

#[test]
fn transfer_at_a_pole_reports_near_pole() {
    // A = -I has eigenvalue -1; evaluating exactly there must not return a
    // finite garbage matrix.
    let eye = DMatrix::<f64>::identity(2, 2);
    let model = StateSpaceModel::new(-&eye, eye.clone(), eye.clone(), eye.clone()).unwrap();
    match model.transfer_eval(Complex64::new(-1.0, 0.0)) {
        Err(Error::NearPole) => {}
        other => panic!("expected near-pole error, got {other:?}"),
    }
}

// ---------------------------------------------------------------------------
// Model construction contracts
// ---------------------------------------------------------------------------

#[test]
fn odd_state_dimension_is_rejected() {
    let a = DMatrix::<f64>::zeros(3, 3);
    let b = DMatrix::<f64>::zeros(3, 2);
    let c = DMatrix::<f64>::zeros(2, 3);
    let d = DMatrix::<f64>::identity(2, 2);
    assert!(matches!(
        StateSpaceModel::new(a, b, c, d),
        Err(Error::InvalidDimension(_))
    ));
}

#[test]
fn mismatched_port_dimensions_are_rejected() {
    let a = DMatrix::<f64>::zeros(4, 4);
    let b = DMatrix::<f64>::zeros(4, 2);
    let c = DMatrix::<f64>::zeros(4, 4); // wrong: 4 output rows for 2 input cols
    let d = DMatrix::<f64>::identity(2, 2);
    assert!(StateSpaceModel::new(a, b, c, d).is_err());
}

// ---------------------------------------------------------------------------
// Plain-text matrix format
// ---------------------------------------------------------------------------

#[test]
fn matrix_file_roundtrip_is_bitwise() {
    let mut rng = support::rng(0x5eed_000b);
    let m = support::rand_matrix(&mut rng, 7, 3, 1e3);
    let dir = std::env::temp_dir().join("qirka-model-ops");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("roundtrip.txt");
    matio::write_matrix(&path, &m).unwrap();
    let back = matio::read_matrix(&path).unwrap();
    assert_eq!(m, back, "17-significant-digit text must round-trip exactly");
}

#[test]
fn matrix_parse_errors_carry_line_numbers() {
    let dir = std::env::temp_dir().join("qirka-model-ops");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ragged.txt");
    std::fs::write(&path, "2 2\n1.0 2.0\n3.0\n").unwrap();
    match matio::read_matrix(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected parse error with line number, got {other:?}"),
    }
}
