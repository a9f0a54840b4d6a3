mod common;

use common::{density, max_diff, pure, space};
use decoupling_core::linalg::{hermitian_eigen, real, CVector};
use decoupling_core::metrics::{fidelity, purity};
use decoupling_core::random::{ginibre, haar_unitary_matrix};
use decoupling_core::{maximally_entangled_on, schmidt, CMatrix, DensityOperator, LinearOp, SeededSource, TensorProduct};
use proptest::prelude::*;

#[test]
fn partial_trace_of_product_returns_factor() {
    let rho = density("A", 3, 3, 1);
    let sigma = density("B", 2, 2, 2);
    let back = rho.tensor(&sigma).unwrap().partial_trace(&["B"]).unwrap();
    assert!(max_diff(back.matrix(), rho.matrix()) < 1e-12);
}

#[test]
fn partial_trace_matches_index_contraction() {
    let psi = pure(&[("A", 2), ("B", 2), ("C", 2)], 3);
    let a = psi.amplitudes();
    let rho = psi.partial_trace(&["B"]).unwrap();
    let mut oracle = CMatrix::zeros(4, 4);
    for x in 0..2 {
        for z in 0..2 {
            for xp in 0..2 {
                for zp in 0..2 {
                    for y in 0..2 {
                        oracle[(x * 2 + z, xp * 2 + zp)] += a[x * 4 + y * 2 + z] * a[xp * 4 + y * 2 + zp].conj();
                    }
                }
            }
        }
    }
    assert!(max_diff(rho.matrix(), &oracle) < 1e-14);
}

#[test]
fn transpose_trick() {
    let phi = maximally_entangled_on("A", "A'", 3).unwrap();
    let x = ginibre(3, 3, &mut SeededSource::new(4).rng());
    let op = |m: CMatrix, l: &str| LinearOp::new(space(&[(l, 3)]), space(&[(l, 3)]), m).unwrap();
    let left = phi.apply_local("A", &op(x.clone(), "A")).unwrap();
    let right = phi.apply_local("A'", &op(x.transpose(), "A'")).unwrap();
    assert!((left.amplitudes() - right.amplitudes()).norm() < 1e-14);
}

#[test]
fn qubit_maximally_entangled_amplitudes() {
    let phi = maximally_entangled_on("A", "B", 2).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let expected = [s, 0.0, 0.0, s];
    for (z, e) in phi.amplitudes().iter().zip(expected) {
        assert!((z.re - e).abs() < 1e-15 && z.im == 0.0);
    }
}

#[test]
fn schmidt_coefficients_are_marginal_eigenvalues() {
    let psi = pure(&[("A", 2), ("B", 3)], 5);
    let s = schmidt(&psi, &["A"]).unwrap();
    let (eigs, _) = hermitian_eigen(psi.reduced(&["A"]).unwrap().matrix());
    for (c, l) in s.coefficients.iter().zip(&eigs) {
        assert!((c * c - l).abs() < 1e-12);
    }
}

#[test]
fn purification_of_rank_three_state() {
    let rho = density("A", 4, 3, 6);
    let psi = rho.purify_with_label("P").unwrap();
    assert_eq!(psi.space().dim_of("P").unwrap(), 3);
    assert!(max_diff(psi.reduced(&["A"]).unwrap().matrix(), rho.matrix()) < 1e-12);
}

#[test]
fn maximally_mixed_purifies_to_maximal_entanglement() {
    let pi = DensityOperator::maximally_mixed(space(&[("A", 2)]));
    let psi = pi.purify_with_label("P").unwrap();
    let s = schmidt(&psi, &["A"]).unwrap();
    assert!(s.coefficients.iter().all(|c| (c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12));
}

#[test]
fn swap_trick_purity() {
    let rho = density("A", 3, 3, 7);
    let f = LinearOp::swap(3);
    let two = decoupling_core::linalg::kron(rho.matrix(), rho.matrix());
    assert!(((two * f).trace().re - purity(rho.matrix())).abs() < 1e-12);
}

#[test]
fn sampled_alignments_never_beat_uhlmann() {
    let rho = density("A", 2, 2, 8);
    let sigma = density("A", 2, 2, 9);
    let f = fidelity(&rho, &sigma).unwrap();
    let coeffs = |d: &DensityOperator| {
        let p = d.purify_with_label("P").unwrap();
        p.as_matrix(&["A"]).unwrap().0
    };
    let (mr, ms) = (coeffs(&rho), coeffs(&sigma));
    let mut rng = SeededSource::new(10).rng();
    for _ in 0..200 {
        let u = haar_unitary_matrix(2, &mut rng);
        // ⟨ρ_pur|(I ⊗ U)|σ_pur⟩ = Tr(M_ρ† M_σ Uᵀ)
        let overlap = (mr.adjoint() * &ms * u.transpose()).trace().norm_sqr();
        assert!(overlap <= f + 1e-9);
    }
    let best: f64 = decoupling_core::linalg::singular_values(&(mr.adjoint() * &ms)).iter().sum();
    assert!((best * best - f).abs() < 1e-9);
}

fn arb_state(d: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| {
            let z = CVector::from_iterator(v.len(), v.into_iter().map(|(a, b)| decoupling_core::linalg::c(a, b)));
            let n = z.norm();
            z / real(n)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schmidt_round_trips(v in arb_state(6)) {
        let psi = decoupling_core::StateVector::new(space(&[("A", 2), ("B", 3)]), v).unwrap();
        let back = schmidt(&psi, &["A"]).unwrap().reconstruct().unwrap();
        prop_assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn tensor_then_trace_is_identity(v in arb_state(3), w in arb_state(2)) {
        let a = decoupling_core::StateVector::new(space(&[("A", 3)]), v).unwrap();
        let b = decoupling_core::StateVector::new(space(&[("B", 2)]), w).unwrap();
        let rho = DensityOperator::from_pure(&a);
        let joint = rho.tensor(&DensityOperator::from_pure(&b)).unwrap();
        prop_assert!(max_diff(joint.partial_trace(&["B"]).unwrap().matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn marginals_have_unit_trace(v in arb_state(12)) {
        let psi = decoupling_core::StateVector::new(space(&[("A", 2), ("B", 3), ("C", 2)]), v).unwrap();
        for keep in [&["A"][..], &["B", "C"][..], &["C", "A"][..]] {
            prop_assert!((psi.reduced(keep).unwrap().trace() - 1.0).abs() < 1e-12);
        }
    }
}
