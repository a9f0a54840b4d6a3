mod common;

use common::{max_diff, pure};
use decoupling_core::channel::purified_output;
use decoupling_core::coding::{encoding_matrix, prepare_code, run_trial, CodeExperimentConfig, SubspaceMode};
use decoupling_core::decoder::{build_decoder, build_decoder_labeled, entanglement_fidelity};
use decoupling_core::decoupling::trace_distance_to_decoupled;
use decoupling_core::linalg::{identity, isometry_defect, real, CMatrix, CVector};
use decoupling_core::metrics::fidelity;
use decoupling_core::random::haar_unitary_matrix;
use decoupling_core::{maximally_entangled_on, Channel, DensityOperator, SeededSource, StateVector, TensorSpace};
use proptest::prelude::*;

#[test]
fn single_erasure_satisfies_fidelity_bound() {
    let pi = DensityOperator::maximally_mixed(TensorSpace::single("A'", 2).unwrap());
    let psi = purified_output(&pi, &Channel::erasure(2, 0.3).unwrap()).unwrap();
    let d = build_decoder_labeled(&psi, "A", "B", "E").unwrap();
    let tdist = trace_distance_to_decoupled(&psi.reduced(&["A", "E"]).unwrap(), "A").unwrap();
    assert!((tdist - d.decoupling_tdist).abs() < 1e-12);
    assert!(d.achieved_fidelity >= 1.0 - tdist - 1e-8);
    // erasure: decode perfectly when not erased, guess when erased
    assert!((d.channel_fidelity - (0.7 + 0.3 * 0.25)).abs() < 1e-10);
}

#[test]
fn end_to_end_recomputation_matches_channel_fidelity() {
    let channel = Channel::erasure(2, 0.1).unwrap();
    let cfg = CodeExperimentConfig {
        channel: channel.clone(),
        phi: DensityOperator::maximally_mixed(TensorSpace::single("A'", 2).unwrap()),
        n: 3,
        r_dim: 2,
        trials: 1,
        delta: 0.3,
        seed: 1,
        mode: SubspaceMode::FullInput,
    };
    let code = prepare_code(&cfg).unwrap();
    for seed in 0..3 {
        let u = haar_unitary_matrix(8, &mut SeededSource::new(seed).rng());
        let ups = encoding_matrix(&code, &u);
        let space = TensorSpace::new([("R", 2), ("A'", 8)]).unwrap();
        let encoding = StateVector::new(space, CVector::from_fn(16, |i, _| ups[(i / 8, i % 8)])).unwrap();
        let record = run_trial(&code, 0, &u).unwrap();
        let out = &ups * code.dilation.transpose();
        let be = out.ncols();
        let space = TensorSpace::new([("R", 2), ("B", code.b_dim), ("E", code.e_dim)]).unwrap();
        let psi = StateVector::new(space, CVector::from_fn(2 * be, |i, _| out[(i / be, i % be)])).unwrap();
        let decoder = build_decoder(&psi).unwrap().channel();
        let f = entanglement_fidelity(&encoding, &channel, 3, &decoder).unwrap();
        assert!((f - record.channel_fidelity).abs() < 1e-8);
        assert!(f >= record.achieved_fidelity - 1e-10);
    }
}

#[test]
fn fully_depolarizing_channel_caps_any_decoder() {
    let phi = maximally_entangled_on("R", "A'", 2).unwrap();
    let ch = Channel::depolarizing(2, 1.0).unwrap();
    for seed in 0..5 {
        let decoder = Channel::random(2, 2, 3, &mut SeededSource::new(seed).rng()).unwrap();
        assert!(entanglement_fidelity(&phi, &ch, 1, &decoder).unwrap() <= 0.5 + 1e-8);
    }
}

#[test]
fn identity_channel_with_identity_decoder() {
    let phi = maximally_entangled_on("R", "A'", 2).unwrap();
    let id = Channel::identity(2).unwrap();
    assert!((entanglement_fidelity(&phi, &id, 1, &id).unwrap() - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decoder_is_optimal_and_meets_bound(seed in 0u64..100_000, r in 1usize..5, b in 1usize..5, e in 1usize..5) {
        let psi = pure(&[("R", r), ("B", b), ("E", e)], seed);
        let d = build_decoder(&psi).unwrap();
        let rho_re = psi.reduced(&["R", "E"]).unwrap();
        let rho_e = psi.reduced(&["E"]).unwrap();
        let target = DensityOperator::new(
            rho_re.space().clone(),
            decoupling_core::linalg::kron(&(identity(r) * real(1.0 / r as f64)), rho_e.matrix()),
        ).unwrap();
        let f = fidelity(&rho_re, &target).unwrap();
        prop_assert!((d.achieved_fidelity - f).abs() < 1e-8);
        prop_assert!(d.achieved_fidelity >= 1.0 - d.decoupling_tdist - 1e-8);
        prop_assert!(isometry_defect(d.w.matrix()) < 1e-10);
        let ch = d.channel();
        for i in 0..b {
            for j in 0..b {
                let mut unit = CMatrix::zeros(b, b);
                unit[(i, j)] = real(1.0);
                let tr = ch.apply_matrix(&unit).trace();
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((tr - real(expected)).norm() < 1e-10);
            }
        }
        prop_assert!(max_diff(&(ch.kraus().iter().fold(CMatrix::zeros(b, b), |acc, k| acc + k.adjoint() * k)), &identity(b)) < 1e-10);
    }
}
