#![allow(dead_code)]

use decoupling_core::random::{random_density, random_pure_state};
use decoupling_core::{CMatrix, DensityOperator, SeededSource, StateVector, TensorSpace};

pub fn space(factors: &[(&str, usize)]) -> TensorSpace {
    TensorSpace::new(factors.iter().copied()).unwrap()
}

pub fn density(label: &str, d: usize, rank: usize, seed: u64) -> DensityOperator {
    random_density(space(&[(label, d)]), rank, &mut SeededSource::new(seed).rng())
}

pub fn pure(factors: &[(&str, usize)], seed: u64) -> StateVector {
    random_pure_state(space(factors), &mut SeededSource::new(seed).rng())
}

pub fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    decoupling_core::linalg::max_abs(&(a - b))
}
