//! Oracles and deterministic random generators for the acceptance suite.
//! Mirrors the core crate's integration-test support module: the Lyapunov
//! oracle vectorizes the equation with Kronecker products and the H2 oracle
//! integrates the transfer function over frequency, so agreement with the
//! library is evidence, not tautology.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qirka_core::{pr_from_template, HamiltonianMatrix, StateSpaceModel};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for a named test.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random matrix with entries in `[-scale, scale]`.
pub fn rand_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..scale))
}

/// Uniform random symmetric matrix with entries in `[-scale, scale]`.
pub fn rand_symmetric(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> DMatrix<f64> {
    let m = rand_matrix(rng, dim, dim, scale);
    0.5 * (&m + m.transpose())
}

/// Random physically realizable model from a random Hamiltonian template:
/// symmetric `R`, dense port matrix `B`.
pub fn rand_pr_model(rng: &mut ChaCha8Rng, n: usize, m: usize) -> StateSpaceModel {
    let r = rand_symmetric(rng, 2 * n, 1.0);
    let b = rand_matrix(rng, 2 * n, 2 * m, 1.0);
    pr_from_template(&HamiltonianMatrix::new(r).unwrap(), b).unwrap()
}

/// Random *stable* physically realizable model: diagonally dominant `R` and
/// a passive coupling `B = G ⊗ I_2`.  Retries until the drift is Hurwitz.
pub fn rand_stable_pr_model(rng: &mut ChaCha8Rng, n: usize, m: usize) -> StateSpaceModel {
    for _ in 0..200 {
        let mut r = rand_symmetric(rng, 2 * n, 0.5);
        for i in 0..2 * n {
            r[(i, i)] += 1.0 + 2.0 * rng.random_range(0.0..1.0);
        }
        let g = DMatrix::from_fn(n, m, |_, _| rng.random_range(0.2..1.2));
        let eye2 = DMatrix::<f64>::identity(2, 2);
        let b = g.kronecker(&eye2);
        let model = pr_from_template(&HamiltonianMatrix::new(r).unwrap(), b).unwrap();
        if spectral_abscissa(model.a()) < -1e-6 {
            return model;
        }
    }
    panic!("no stable draw found; pick a different seed");
}

/// Random Hurwitz matrix with spectral abscissa at most `-margin`.
pub fn rand_hurwitz(rng: &mut ChaCha8Rng, dim: usize, margin: f64) -> DMatrix<f64> {
    let mut a = rand_matrix(rng, dim, dim, 1.0);
    let alpha = spectral_abscissa(&a);
    for i in 0..dim {
        a[(i, i)] -= alpha + margin;
    }
    a
}

/// Largest real part over the spectrum (filtering helper only).
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Solves `A X + X A^T + Q = 0` by vectorizing with Kronecker products:
/// `(I ⊗ A + A ⊗ I) vec(X) = -vec(Q)` (column-major vec), `dim ≲ 20`.
pub fn kron_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = a.nrows();
    assert_eq!(a.ncols(), dim);
    assert_eq!(q.nrows(), dim);
    assert_eq!(q.ncols(), dim);
    let eye = DMatrix::<f64>::identity(dim, dim);
    let lhs = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = DVector::from_column_slice(q.as_slice());
    let x = lhs
        .lu()
        .solve(&(-rhs))
        .expect("vectorized Lyapunov operator must be invertible for Hurwitz A");
    DMatrix::from_column_slice(dim, dim, x.as_slice())
}

fn strictly_proper_gain_sq(model: &StateSpaceModel, omega: f64) -> f64 {
    let h = model
        .transfer_eval(Complex64::new(0.0, omega))
        .expect("evaluation on the imaginary axis of a stable model");
    let mut sum = 0.0;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            sum += (h[(i, j)] - Complex64::new(model.d()[(i, j)], 0.0)).norm_sqr();
        }
    }
    sum
}

/// H2 norm by direct frequency-domain quadrature:
/// `‖H - D‖² = (1/π) ∫_0^∞ ‖G(iω)‖_F² dω` with `ω = t/(1-t)`, Simpson grid
/// refined until the value changes by less than `1e-7` relative.
pub fn quadrature_h2(model: &StateSpaceModel) -> f64 {
    let cb = model.c() * model.b();
    let tail = cb.norm_squared();

    let integrand = |t: f64| -> f64 {
        if t >= 1.0 {
            return tail;
        }
        let omega = t / (1.0 - t);
        let jac = 1.0 / ((1.0 - t) * (1.0 - t));
        strictly_proper_gain_sq(model, omega) * jac
    };

    let mut previous = f64::INFINITY;
    let mut panels = 64usize;
    loop {
        let h = 1.0 / panels as f64;
        let mut acc = integrand(0.0) + integrand(1.0);
        for k in 1..panels {
            let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += weight * integrand(k as f64 * h);
        }
        let value = acc * h / 3.0;
        if (value - previous).abs() <= 1e-7 * value.abs().max(1e-300) || panels >= 1 << 17 {
            return (value / std::f64::consts::PI).max(0.0).sqrt();
        }
        previous = value;
        panels *= 2;
    }
}

/// Greedy nearest-neighbour matching distance between two spectra of equal
/// length: the maximum over points of the distance to the closest unmatched
/// partner.
pub fn spectrum_match_distance(left: &[Complex64], right: &[Complex64]) -> f64 {
    assert_eq!(left.len(), right.len());
    let mut unused: Vec<Complex64> = right.to_vec();
    let mut worst = 0.0f64;
    for l in left {
        let (idx, dist) = unused
            .iter()
            .enumerate()
            .map(|(i, r)| (i, (l - r).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty spectrum");
        worst = worst.max(dist);
        unused.swap_remove(idx);
    }
    worst
}
