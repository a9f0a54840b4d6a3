mod common;

use common::{density, max_diff, space};
use decoupling_core::channel::purified_output;
use decoupling_core::linalg::{identity, real, CMatrix, CVector};
use decoupling_core::random::ginibre;
use decoupling_core::typicality::{
    enumerate_types, flatten_code, gentle_measurement, type_class_dim, typical_projector, verify_typ_bounds, TypeVector,
};
use decoupling_core::{Channel, DensityOperator, SeededSource};
use std::collections::BTreeMap;

fn diag(p: &[f64]) -> DensityOperator {
    let m = CMatrix::from_diagonal(&CVector::from_iterator(p.len(), p.iter().map(|&x| real(x))));
    DensityOperator::new(space(&[("A", p.len())]), m).unwrap()
}

fn pi2() -> DensityOperator {
    DensityOperator::maximally_mixed(space(&[("A'", 2)]))
}

#[test]
fn ternary_types_match_brute_enumeration() {
    let mut counted: BTreeMap<Vec<usize>, u128> = BTreeMap::new();
    for idx in 0..81usize {
        let mut c = vec![0; 3];
        let mut x = idx;
        for _ in 0..4 {
            c[x % 3] += 1;
            x /= 3;
        }
        *counted.entry(c).or_default() += 1;
    }
    let types = enumerate_types(4, 3);
    assert_eq!(types.len(), 15);
    assert_eq!(types.iter().map(type_class_dim).sum::<u128>(), 81);
    for t in &types {
        assert_eq!(type_class_dim(t), counted[&t.counts]);
    }
}

#[test]
fn biased_coin_retains_single_type() {
    let dec = typical_projector(&diag(&[0.75, 0.25]), 4, 0.1).unwrap();
    let kept: Vec<&TypeVector> = dec.retained_types();
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0].counts, vec![3, 1]);
    assert_eq!(dec.rank(), 4);
}

#[test]
fn extreme_spectra() {
    let pure = typical_projector(&diag(&[1.0, 0.0]), 5, 0.1).unwrap();
    assert_eq!(pure.rank(), 1);
    let mixed = typical_projector(&diag(&[0.5, 0.5]), 5, 0.5).unwrap();
    assert_eq!(mixed.rank(), 32);
}

#[test]
fn type_projectors_partition_the_space() {
    let phi = density("A", 3, 3, 1);
    let dec = typical_projector(&phi, 3, 1.0).unwrap();
    let projs: Vec<CMatrix> = dec.types().iter().map(|t| dec.type_projector(t)).collect();
    let sum = projs.iter().fold(CMatrix::zeros(27, 27), |acc, p| acc + p);
    assert!(max_diff(&sum, &identity(27)) < 1e-12);
    for i in 0..projs.len() {
        for j in 0..i {
            assert!(decoupling_core::linalg::max_abs(&(&projs[i] * &projs[j])) < 1e-12);
        }
    }
}

#[test]
fn noiseless_channel_needs_no_flattening() {
    let psi = purified_output(&pi2(), &Channel::identity(2).unwrap()).unwrap();
    let code = flatten_code(&psi, 4, 0.3).unwrap();
    assert!(code.discarded.is_empty());
    let a = 1.0 / code.a_t_dim as f64;
    assert!(code.alphas.iter().all(|x| (x - a).abs() < 1e-12));
    assert!(code.typ3_distance() < 1e-12);
    let report = verify_typ_bounds(&code);
    assert_eq!(report.dims.e_delta, 1);
    assert!(report.bound("typ1_env_dim").unwrap().pass);
}

#[test]
fn half_dephasing_state_is_close_to_its_flattening() {
    let psi = purified_output(&pi2(), &Channel::dephasing(0.5).unwrap()).unwrap();
    let code = flatten_code(&psi, 4, 0.3).unwrap();
    let report = verify_typ_bounds(&code);
    assert!(code.typ3_distance() <= code.epsilon + 1e-12);
    for name in ["typ1_env_dim", "typ3_trace_distance", "dimension", "gentle_measurement"] {
        assert!(report.bound(name).unwrap().pass, "{name}");
    }
    // c' only exists below eps = 4/9
    assert!(code.epsilon > 4.0 / 9.0);
    assert!(!report.bound("typ2_purity_cprime").unwrap().pass);
}

#[test]
fn dimension_and_proof_steps_hold_across_runs() {
    let mut rng = SeededSource::new(2).rng();
    let mut runs = vec![
        (Channel::dephasing(0.2).unwrap(), pi2(), 2),
        (Channel::dephasing(0.2).unwrap(), pi2(), 4),
        (Channel::amplitude_damping(0.1).unwrap(), pi2(), 4),
        (Channel::erasure(2, 0.2).unwrap(), pi2(), 4),
    ];
    for _ in 0..3 {
        let ch = Channel::random(2, 2, 2, &mut rng).unwrap();
        runs.push((ch, diag(&[0.7, 0.3]).relabeled("A", "A'").unwrap(), 4));
    }
    for (ch, phi, n) in runs {
        let code = flatten_code(&purified_output(&phi, &ch).unwrap(), n, 0.3).unwrap();
        let report = verify_typ_bounds(&code);
        for name in ["dimension", "discard_count", "flattening_proximity", "typ3_proof_chain", "gentle_measurement"] {
            let b = report.bound(name).unwrap();
            assert!(b.pass, "{} failed for {} at n = {n}: {b:?}", name, ch.name());
        }
        if code.epsilon < 4.0 / 9.0 {
            assert!(report.bound("typ2_purity_cprime").unwrap().pass, "c' bound failed for {}", ch.name());
        }
        if let Some(min) = code.domination_min_eig {
            assert!(min.is_finite());
        }
        assert!(code.flattening_defect() <= code.flattening_distance() + 1e-12);
    }
}

#[test]
fn gentle_measurement_on_random_instances() {
    let mut rng = SeededSource::new(3).rng();
    for k in 0..20 {
        let rho = density("A", 5, 3, 100 + k);
        let g = ginibre(5, 3, &mut rng);
        let q = g.qr().q();
        let proj = &q * q.adjoint();
        let gm = gentle_measurement(rho.matrix(), &proj).unwrap();
        assert!(gm.distance <= gm.bound + 1e-12);
    }
}

#[test]
fn iota_per_symbol_decreases() {
    let psi = purified_output(&pi2(), &Channel::dephasing(0.1).unwrap()).unwrap();
    let per_symbol: Vec<f64> = [2, 4, 6]
        .iter()
        .map(|&n| flatten_code(&psi, n, 0.3).unwrap().iota() / n as f64)
        .collect();
    assert!(per_symbol.windows(2).all(|w| w[1] < w[0]), "{per_symbol:?}");
}
