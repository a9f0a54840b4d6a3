//! Derivative-free maximization of coherent information over input states.
//!
//! A density matrix on `C^d` is the reduced state of a unit vector in
//! `C^d ⊗ C^d`; that vector is written in hyperspherical angles so every
//! point of the search space is a valid state.

use serde::{Deserialize, Serialize};

use crate::channel::{coherent_information_matrix, Channel};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::random::SeededSource;
use crate::tensor::{DensityOperator, TensorSpace};
use rand::Rng;

/// Unit vector in `R^{m}` from `m − 1` hyperspherical angles.
pub fn vector_from_angles(theta: &[f64]) -> Vec<f64> {
    let m = theta.len() + 1;
    let mut v = vec![0.0; m];
    let mut s = 1.0;
    for (k, &t) in theta.iter().enumerate() {
        v[k] = s * t.cos();
        s *= t.sin();
    }
    v[m - 1] = s;
    v
}

/// Inverse of [`vector_from_angles`] for a unit vector.
pub fn angles_from_vector(v: &[f64]) -> Vec<f64> {
    let m = v.len();
    let mut theta = vec![0.0; m.saturating_sub(1)];
    for k in 0..m.saturating_sub(1) {
        let tail: f64 = v[k + 1..].iter().map(|x| x * x).sum::<f64>().sqrt();
        theta[k] = tail.atan2(v[k]);
    }
    // the last angle carries the sign of the final component
    if m >= 2 && v[m - 1] < 0.0 {
        theta[m - 2] = -theta[m - 2];
    }
    theta
}

/// Reduced state `Tr_2 |v⟩⟨v|` of the purification encoded by `theta`.
pub fn state_from_angles(theta: &[f64], d: usize) -> CMatrix {
    let v = vector_from_angles(theta);
    // v holds (re, im) pairs of a d×d coefficient matrix
    let m = CMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        c(v[k], v[k + 1])
    });
    &m * m.adjoint()
}

/// Angles of a purification of `rho`.
pub fn angles_for_state(rho: &DensityOperator) -> Vec<f64> {
    let d = rho.dim();
    let (vals, vecs) = rho.eigen();
    // Σ_k √λ_k |v_k⟩|k⟩
    let mut flat = vec![0.0; 2 * d * d];
    for k in 0..d {
        let w = vals[k].max(0.0).sqrt();
        for i in 0..d {
            let z = vecs[(i, k)] * w;
            flat[2 * (i * d + k)] = z.re;
            flat[2 * (i * d + k) + 1] = z.im;
        }
    }
    let norm: f64 = flat.iter().map(|x| x * x).sum::<f64>().sqrt();
    flat.iter_mut().for_each(|x| *x /= norm);
    angles_from_vector(&flat)
}

/// Nelder–Mead settings.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NelderMead {
    pub iterations: usize,
    pub initial_step: f64,
    /// Stop once the spread of simplex values falls below this.
    pub tolerance: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            iterations: 400,
            initial_step: 0.4,
            tolerance: 1e-12,
        }
    }
}

/// Minimum found and the best-so-far value after each iteration.
#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub history: Vec<f64>,
}

impl NelderMead {
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, start: &[f64]) -> Minimum {
        let dim = start.len();
        if dim == 0 {
            let v = f(start);
            return Minimum {
                x: Vec::new(),
                value: v,
                history: vec![v],
            };
        }
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((start.to_vec(), f(start)));
        for k in 0..dim {
            let mut x = start.to_vec();
            x[k] += self.initial_step;
            let v = f(&x);
            simplex.push((x, v));
        }
        let mut history = Vec::with_capacity(self.iterations);
        for _ in 0..self.iterations {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            history.push(simplex[0].1);
            if simplex[dim].1 - simplex[0].1 < self.tolerance {
                break;
            }
            let centroid: Vec<f64> = (0..dim)
                .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[dim].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };
            let xr = along(-1.0);
            let fr = f(&xr);
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = f(&xe);
                simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[dim - 1].1 {
                simplex[dim] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[dim].1 {
                    let x = along(-0.5);
                    let v = f(&x);
                    (x, v)
                } else {
                    let x = along(0.5);
                    let v = f(&x);
                    (x, v)
                };
                if fc < simplex[dim].1.min(fr) {
                    simplex[dim] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for (x, v) in simplex.iter_mut().skip(1) {
                        for k in 0..dim {
                            x[k] = best[k] + 0.5 * (x[k] - best[k]);
                        }
                        *v = f(x);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let (x, value) = simplex.swap_remove(0);
        history.push(value);
        Minimum { x, value, history }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub restart: usize,
    pub value: f64,
    /// Best-so-far coherent information after each iteration (nondecreasing).
    pub history: Vec<f64>,
}

/// Best coherent information found; a lower bound on the single-letter maximum.
#[derive(Clone, Debug)]
pub struct CoherentInfoMax {
    pub state: DensityOperator,
    pub value: f64,
    pub restarts: Vec<RestartOutcome>,
}

fn run_restarts(channel: &Channel, starts: Vec<Vec<f64>>, nm: &NelderMead) -> Vec<(Vec<f64>, RestartOutcome)> {
    let d = channel.in_dim();
    let one = |(i, start): (usize, Vec<f64>)| {
        let m = nm.minimize(|th| -coherent_information_matrix(&state_from_angles(th, d), channel), &start);
        let history = m.history.iter().map(|v| -v).collect();
        (
            m.x,
            RestartOutcome {
                restart: i,
                value: -m.value,
                history,
            },
        )
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        starts.into_par_iter().enumerate().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        starts.into_iter().enumerate().map(one).collect()
    }
}

fn random_angles(m: usize, src: &SeededSource) -> Vec<f64> {
    let mut rng = src.rng();
    (0..m).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect()
}

/// Multi-start Nelder–Mead ascent of `I_c(φ, N)` over input states `φ`.
/// Restart `i` starts from angles drawn with `src.substream(i)`; extra
/// starting points in `seeds` run first.
pub fn maximize_coherent_information_from(
    channel: &Channel,
    restarts: usize,
    iterations: usize,
    src: &SeededSource,
    seeds: &[DensityOperator],
) -> Result<CoherentInfoMax> {
    let d = channel.in_dim();
    if restarts + seeds.len() == 0 {
        return Err(Error::InvalidParameter("need at least one restart".into()));
    }
    let m = 2 * d * d - 1;
    let mut starts: Vec<Vec<f64>> = seeds.iter().map(angles_for_state).collect();
    starts.extend((0..restarts).map(|i| random_angles(m, &src.substream(i as u64))));
    let nm = NelderMead {
        iterations,
        ..NelderMead::default()
    };
    let results = run_restarts(channel, starts, &nm);
    let (best_x, _) = results
        .iter()
        .max_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap_or(std::cmp::Ordering::Equal))
        .expect("at least one restart");
    let state = DensityOperator::new(TensorSpace::single("A'", d)?, state_from_angles(best_x, d))?;
    let value = coherent_information_matrix(state.matrix(), channel);
    Ok(CoherentInfoMax {
        state,
        value,
        restarts: results.into_iter().map(|(_, r)| r).collect(),
    })
}

pub fn maximize_coherent_information(
    channel: &Channel,
    restarts: usize,
    iterations: usize,
    src: &SeededSource,
) -> Result<CoherentInfoMax> {
    maximize_coherent_information_from(channel, restarts, iterations, src, &[])
}

#[derive(Clone, Debug)]
pub struct MulticopyBound {
    pub n: usize,
    /// `(1/n) · max I_c(φ, N^{⊗n})` over the search.
    pub per_copy: f64,
    /// `(1/n) · I_c(φ*^{⊗n}, N^{⊗n}) = I_c(φ*, N)` for the single-copy optimum.
    pub product_value: f64,
    pub single_copy: CoherentInfoMax,
    pub multi_copy: CoherentInfoMax,
}

/// `(1/n) max I_c(φ, N^{⊗n})`, with one restart seeded at `φ*^{⊗n}`.
pub fn multicopy_lower_bound(
    channel: &Channel,
    n: usize,
    restarts: usize,
    iterations: usize,
    src: &SeededSource,
) -> Result<MulticopyBound> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let power = channel.tensor_power(n)?;
    let single = maximize_coherent_information(channel, restarts, iterations, &src.substream(0))?;
    if n == 1 {
        return Ok(MulticopyBound {
            n,
            per_copy: single.value,
            product_value: single.value,
            multi_copy: single.clone(),
            single_copy: single,
        });
    }
    let mut product = single.state.matrix().clone();
    for _ in 1..n {
        product = crate::linalg::kron(&product, single.state.matrix());
    }
    let product = DensityOperator::new(TensorSpace::single("A'", power.in_dim())?, product)?;
    let product_value = coherent_information_matrix(product.matrix(), &power) / n as f64;
    let multi = maximize_coherent_information_from(&power, restarts, iterations, &src.substream(1), &[product])?;
    Ok(MulticopyBound {
        n,
        per_copy: multi.value / n as f64,
        product_value,
        single_copy: single,
        multi_copy: multi,
    })
}
