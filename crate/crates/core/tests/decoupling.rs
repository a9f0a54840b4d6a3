mod common;

use common::{max_diff, space};
use decoupling_core::decoupling::{
    direct_purities, exact_haar_average_hs, haar_samples, hs_distance_sq, mc_average, oneshot_bound, psi_u,
    random_decoupling_state, swap_trick_purities, weyl_average_hs, DecouplingInstance, Estimate, Metric,
};
use decoupling_core::linalg::{identity, kron, real};
use decoupling_core::metrics::hs_norm_sq;
use decoupling_core::random::haar_unitary;
use decoupling_core::{maximally_entangled_on, Channel, DensityOperator, SeededSource};
use proptest::prelude::*;

fn erasure_instance(p: f64) -> DecouplingInstance {
    DecouplingInstance::from_channel(&Channel::erasure(4, p).unwrap(), 2).unwrap()
}

fn noiseless_instance(s: usize, r: usize) -> DecouplingInstance {
    let psi = DensityOperator::maximally_mixed(space(&[("S", s), ("E", 1)]));
    DecouplingInstance::with_leading_code(psi, r).unwrap()
}

#[test]
fn erasure_distance_is_constant_in_u() {
    for p in [0.1, 0.3, 0.5] {
        let inst = erasure_instance(p);
        let values: Vec<f64> = haar_samples(&inst, 20, &SeededSource::new(1)).unwrap().iter().map(|s| s.hs_sq).collect();
        let expected = p * p * 0.75;
        assert!(values.iter().all(|v| (v - expected).abs() < 1e-10), "p = {p}");
        let est = Estimate::from_values(&values);
        assert!(est.stderr.powi(2) * 20.0 <= 1e-12);
        let exact = exact_haar_average_hs(&inst).unwrap().exact;
        assert!((exact - expected).abs() < 1e-12);
    }
}

#[test]
fn noiseless_instance_decouples_exactly() {
    let inst = noiseless_instance(4, 2);
    let mut rng = SeededSource::new(2).rng();
    for _ in 0..5 {
        let psi = psi_u(&inst, &haar_unitary(4, &mut rng)).unwrap();
        assert!(max_diff(psi.state.matrix(), &(identity(2) * real(0.5))) < 1e-12);
    }
    assert!(exact_haar_average_hs(&inst).unwrap().exact.abs() < 1e-15);
    assert!(mc_average(&inst, Metric::Trace, 50, &SeededSource::new(3)).unwrap().mean < 1e-10);
    assert!((oneshot_bound(&inst) - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn maximally_entangled_environment_bound() {
    let psi = maximally_entangled_on("S", "E", 3).unwrap().projector();
    let inst = DecouplingInstance::with_leading_code(psi, 2).unwrap();
    // purity 1, so the bound is √(|R||E|) and exceeds the trivial value 2
    assert!((oneshot_bound(&inst) - 6f64.sqrt()).abs() < 1e-12);
}

#[test]
fn closed_form_matches_monte_carlo() {
    let mut rng = SeededSource::new(4).rng();
    for (s, e, k) in [(4, 3, 2), (4, 2, 3)] {
        let inst = DecouplingInstance::random(s, e, k, 2, &mut rng).unwrap();
        let exact = exact_haar_average_hs(&inst).unwrap().exact;
        let mc = mc_average(&inst, Metric::HsSquared, 2000, &SeededSource::new(5)).unwrap();
        assert!((mc.mean - exact).abs() <= 5.0 * mc.stderr, "{exact} vs {mc:?}");
    }
}

#[test]
fn weyl_average_is_exact_for_covariant_instances() {
    let inst = erasure_instance(0.3);
    assert!((weyl_average_hs(&inst).unwrap() - 0.0675).abs() < 1e-12);
}

#[test]
fn trace_distance_respects_oneshot_bound() {
    let mut rng = SeededSource::new(6).rng();
    for _ in 0..5 {
        let inst = DecouplingInstance::random(4, 2, 2, 2, &mut rng).unwrap();
        let mc = mc_average(&inst, Metric::Trace, 300, &SeededSource::new(7)).unwrap();
        assert!(mc.mean <= oneshot_bound(&inst) + 5.0 * mc.stderr);
    }
    let inst = erasure_instance(0.3);
    let mc = mc_average(&inst, Metric::Trace, 100, &SeededSource::new(8)).unwrap();
    assert!(mc.mean <= oneshot_bound(&inst));
}

#[test]
fn chain_of_inequalities() {
    let mut rng = SeededSource::new(9).rng();
    let inst = DecouplingInstance::random(4, 3, 3, 2, &mut rng).unwrap();
    let samples = haar_samples(&inst, 2000, &SeededSource::new(10)).unwrap();
    let est = |m: Metric| Estimate::from_values(&samples.iter().map(|s| m.of(s)).collect::<Vec<_>>());
    let (t, t2, h) = (est(Metric::Trace), est(Metric::TraceSquared), est(Metric::HsSquared));
    assert!(t.mean * t.mean <= t2.mean + 5.0 * t2.stderr);
    let scale = (inst.r_dim() * inst.e_dim()) as f64;
    assert!(t2.mean <= scale * h.mean + 5.0 * (t2.stderr + scale * h.stderr));
    let exact = exact_haar_average_hs(&inst).unwrap();
    assert!(exact.exact <= exact.relaxed_bound);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hs_identity_matches_explicit_subtraction(seed in 0u64..100_000, r in 1usize..4, e in 1usize..4, k in 1usize..4) {
        prop_assume!(e * k >= r);
        let psi = random_decoupling_state(r, e, k, &mut SeededSource::new(seed).rng()).unwrap();
        let rho_e = psi.partial_trace(&["R"]).unwrap();
        let reference = kron(&(identity(r) * real(1.0 / r as f64)), rho_e.matrix());
        let direct = hs_norm_sq(&(psi.matrix() - reference));
        let via_identity = hs_distance_sq(&psi, "R").unwrap();
        prop_assert!((direct - via_identity).abs() < 1e-12);
        prop_assert!((via_identity - (psi.purity() - rho_e.purity() / r as f64)).abs() < 1e-10);
    }

    #[test]
    fn swap_trick_identities(seed in 0u64..100_000) {
        let rho = random_decoupling_state(3, 2, 2, &mut SeededSource::new(seed).rng()).unwrap();
        let (a, b) = swap_trick_purities(&rho).unwrap();
        let (c, d) = direct_purities(&rho).unwrap();
        prop_assert!((a - c).abs() < 1e-10 && (b - d).abs() < 1e-10);
    }

    #[test]
    fn per_unitary_trace_is_one(seed in 0u64..100_000) {
        let mut rng = SeededSource::new(seed).rng();
        let inst = DecouplingInstance::random(4, 2, 3, 2, &mut rng).unwrap();
        let psi = psi_u(&inst, &haar_unitary(4, &mut rng)).unwrap();
        prop_assert!(psi.trace_deviation < 1e-12);
    }
}
