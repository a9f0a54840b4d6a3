mod common;

use common::max_diff;
use decoupling_core::decoupling::{distances_for, DecouplingInstance, Estimate};
use decoupling_core::linalg::{identity, kron, real, CMatrix};
use decoupling_core::random::{ginibre, haar_average, haar_unitary_matrix, twirl_schur_project, weyl_matrices, weyl_twirl};
use decoupling_core::{LinearOp, SeededSource};

fn within_stderr(est: &decoupling_core::random::MatrixEstimate, oracle: &CMatrix) -> bool {
    est.mean.iter().zip(oracle.iter()).zip(est.stderr.iter()).all(|((m, o), s)| (m - o).norm() <= 5.0 * s + 1e-12)
}

/// `∫ U^{⊗2} M U^{†⊗2} dU = a I + b F` with the two-copy Weingarten coefficients.
fn weingarten_twirl(m: &CMatrix, d: usize) -> CMatrix {
    let f = LinearOp::swap(d);
    let dd = d as f64;
    let tr_m = m.trace();
    let tr_mf = (m * &f).trace();
    let a = (tr_m - tr_mf / real(dd)) / real(dd * dd - 1.0);
    let b = (tr_mf - tr_m / real(dd)) / real(dd * dd - 1.0);
    identity(d * d) * a + f * b
}

#[test]
fn first_moment_twirl_is_trace_times_identity() {
    let x = ginibre(3, 3, &mut SeededSource::new(1).rng());
    let est = haar_average(3, 10_000, &SeededSource::new(2), |u| u * &x * u.adjoint());
    let oracle = identity(3) * (x.trace() / real(3.0));
    assert!(within_stderr(&est, &oracle));
}

#[test]
fn weyl_set_is_a_one_design() {
    let x = ginibre(4, 4, &mut SeededSource::new(3).rng());
    let ws = weyl_matrices(4);
    let avg = ws.iter().fold(CMatrix::zeros(4, 4), |acc, w| acc + w * &x * w.adjoint()) / real(16.0);
    assert!(max_diff(&avg, &(identity(4) * (x.trace() / real(4.0)))) < 1e-12);
}

#[test]
fn weyl_set_is_not_a_two_design() {
    let z = CMatrix::from_diagonal(&decoupling_core::CVector::from_vec(vec![real(1.0), real(-1.0)]));
    let zz = kron(&z, &z);
    let twirled = weyl_twirl(&zz);
    assert!(max_diff(&twirled, &zz) < 1e-12);
    assert!(twirl_schur_project(&twirled).residual > 0.5);
}

#[test]
fn haar_two_copy_twirl_matches_weingarten() {
    let d = 2;
    let m = ginibre(d * d, d * d, &mut SeededSource::new(4).rng());
    let est = haar_average(d, 10_000, &SeededSource::new(5), |u| {
        let u2 = kron(u, u);
        &u2 * &m * u2.adjoint()
    });
    assert!(within_stderr(&est, &weingarten_twirl(&m, d)));
    let exact = twirl_schur_project(&weingarten_twirl(&m, d));
    assert!(exact.residual < 1e-12);
}

#[test]
fn haar_twirl_of_partial_swap_lands_in_span() {
    // swap of the R factors of two copies of S = R ⊗ X with |R| = |X| = 2
    let f_r = {
        let swap_r = LinearOp::permutation(
            &common::space(&[("R", 2), ("X", 2), ("R~", 2), ("X~", 2)]),
            &["R~", "X", "R", "X~"],
        )
        .unwrap();
        swap_r.matrix().clone()
    };
    let est = haar_average(4, 10_000, &SeededSource::new(6), |u| {
        let u2 = kron(u, u);
        u2.adjoint() * &f_r * &u2
    });
    let oracle = weingarten_twirl(&f_r, 4);
    assert!(within_stderr(&est, &oracle));
    let p = twirl_schur_project(&est.mean);
    let noise: f64 = est.stderr.iter().map(|s| s * s).sum::<f64>().sqrt();
    assert!(p.residual <= 5.0 * noise);
}

#[test]
fn haar_draws_are_left_invariant() {
    let mut rng = SeededSource::new(7).rng();
    let inst = DecouplingInstance::random(4, 3, 3, 2, &mut rng).unwrap();
    let v = haar_unitary_matrix(4, &mut rng);
    let n = 3000;
    let plain: Vec<f64> = (0..n)
        .map(|i| {
            let u = haar_unitary_matrix(4, &mut SeededSource::with_stream(8, 0).substream(i).rng());
            distances_for(&inst, &u).unwrap().hs_sq
        })
        .collect();
    let shifted: Vec<f64> = (0..n)
        .map(|i| {
            let u = haar_unitary_matrix(4, &mut SeededSource::with_stream(8, 1).substream(i).rng());
            distances_for(&inst, &(&v * u)).unwrap().hs_sq
        })
        .collect();
    let (a, b) = (Estimate::from_values(&plain), Estimate::from_values(&shifted));
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() <= 5.0 * se, "{a:?} vs {b:?}");
}
