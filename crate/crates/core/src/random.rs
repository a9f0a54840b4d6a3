//! Reproducible Haar sampling and the Weyl unitary 2-design.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, real, CMatrix, C64, ZERO};
use crate::tensor::{DensityOperator, LinearOp, StateVector, TensorSpace};

/// Counter-based seed: a master seed plus a stream identifier.
///
/// The same pair always yields the same draws. Sub-streams for trials or
/// restarts are obtained with [`SeededSource::substream`], so parallel tasks
/// never share generator state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeededSource {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeededSource {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            stream_id: 0,
        }
    }

    pub fn with_stream(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Derived source for task `index` of this stream.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15))),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Complex Gaussian matrix with `E|z|² = 1` entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases fixed so
/// that the triangular factor has a positive real diagonal.
pub fn haar_unitary_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { real(1.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar unitary on a single factor labeled `S`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> LinearOp {
    let space = TensorSpace::single("S", d).expect("positive dimension");
    LinearOp::unitary(space, haar_unitary_matrix(d, rng)).expect("QR factor is unitary")
}

/// Uniformly random pure state on `space`.
pub fn random_pure_state<R: Rng + ?Sized>(space: TensorSpace, rng: &mut R) -> StateVector {
    let g = ginibre(space.total_dim(), 1, rng);
    StateVector::normalized_from(space, g.column(0).into_owned()).expect("nonzero Gaussian vector")
}

/// Random mixed state `GG†/Tr GG†` with `G` a `d × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(space: TensorSpace, rank: usize, rng: &mut R) -> DensityOperator {
    let g = ginibre(space.total_dim(), rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(space, crate::linalg::hermitize(&(m / real(tr)))).expect("Wishart matrix is a state")
}

/// Weyl operators `X^a Z^b` ordered by `a·d + b`, with `X|k⟩ = |k+1 mod d⟩`
/// and `Z|k⟩ = ω^k |k⟩`, `ω = e^{2πi/d}`.
pub fn weyl_matrices(d: usize) -> Vec<CMatrix> {
    let omega = |k: usize| {
        let theta = 2.0 * std::f64::consts::PI * (k % d) as f64 / d as f64;
        C64::from_polar(1.0, theta)
    };
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // (X^a Z^b)|k⟩ = ω^{bk} |k + a⟩
            let mut w = CMatrix::zeros(d, d);
            for k in 0..d {
                w[((k + a) % d, k)] = omega(b * k);
            }
            out.push(w);
        }
    }
    out
}

pub fn weyl_unitaries(d: usize) -> Vec<LinearOp> {
    let space = TensorSpace::single("S", d).expect("positive dimension");
    weyl_matrices(d)
        .into_iter()
        .map(|w| LinearOp::unitary(space.clone(), w).expect("Weyl operators are unitary"))
        .collect()
}

/// Least-squares decomposition of a two-copy operator onto `span{I, F}`.
#[derive(Clone, Copy, Debug)]
pub struct SchurProjection {
    pub identity_coeff: C64,
    pub swap_coeff: C64,
    /// Hilbert–Schmidt norm of `M − a·I − b·F`.
    pub residual: f64,
}

/// Projects `m` (acting on `d ⊗ d`) onto the span of the identity and swap.
pub fn twirl_schur_project(m: &CMatrix) -> SchurProjection {
    let n = m.nrows();
    let d = (n as f64).sqrt().round() as usize;
    assert_eq!(d * d, n, "two-copy operator must act on a d² space");
    let f = LinearOp::swap(d);
    let id = CMatrix::identity(n, n);
    let tr_m = m.trace();
    let tr_fm = (&f * m).trace();
    let (a, b) = if d == 1 {
        (tr_m, ZERO)
    } else {
        // Gram matrix [[d², d], [d, d²]] (I and F are Hermitian)
        let dd = d as f64;
        let det = dd.powi(4) - dd * dd;
        let a = (tr_m * (dd * dd) - tr_fm * dd) / det;
        let b = (tr_fm * (dd * dd) - tr_m * dd) / det;
        (a, b)
    };
    let resid = m - id * a - f * b;
    SchurProjection {
        identity_coeff: a,
        swap_coeff: b,
        residual: crate::metrics::hs_norm_sq(&resid).sqrt(),
    }
}

/// Exact Weyl average `(1/d²) Σ_k (W_k†)^{⊗2} M W_k^{⊗2}`.
pub fn weyl_twirl(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let d = (n as f64).sqrt().round() as usize;
    let mut acc = CMatrix::zeros(n, n);
    for w in weyl_matrices(d) {
        let w2 = w.kronecker(&w);
        acc += w2.adjoint() * m * &w2;
    }
    acc / real((d * d) as f64)
}

/// Monte-Carlo mean and elementwise standard error of a matrix-valued function.
#[derive(Clone, Debug)]
pub struct MatrixEstimate {
    pub mean: CMatrix,
    /// `sqrt(var(re) + var(im)) / sqrt(n)` per entry.
    pub stderr: nalgebra::DMatrix<f64>,
    pub samples: usize,
}

/// Averages `f(U)` over `samples` Haar unitaries on dimension `d`. Sample `i`
/// uses `src.substream(i)`.
pub fn haar_average<F>(d: usize, samples: usize, src: &SeededSource, f: F) -> MatrixEstimate
where
    F: Fn(&CMatrix) -> CMatrix,
{
    assert!(samples >= 2, "need at least two samples for a standard error");
    let mut sum: Option<CMatrix> = None;
    let mut sum_sq: Option<nalgebra::DMatrix<f64>> = None;
    for i in 0..samples {
        let mut rng = src.substream(i as u64).rng();
        let u = haar_unitary_matrix(d, &mut rng);
        let x = f(&u);
        let sq = x.map(|z| z.norm_sqr());
        match (&mut sum, &mut sum_sq) {
            (Some(s), Some(q)) => {
                *s += &x;
                *q += sq;
            }
            _ => {
                sum = Some(x);
                sum_sq = Some(sq);
            }
        }
    }
    let n = samples as f64;
    let mean = sum.expect("samples ≥ 2") / real(n);
    let second = sum_sq.expect("samples ≥ 2") / n;
    let var = nalgebra::DMatrix::from_fn(mean.nrows(), mean.ncols(), |i, j| {
        ((second[(i, j)] - mean[(i, j)].norm_sqr()) * n / (n - 1.0)).max(0.0)
    });
    MatrixEstimate {
        stderr: var.map(|v| (v / n).sqrt()),
        mean,
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{isometry_defect, max_abs};

    #[test]
    fn same_source_same_draws() {
        let src = SeededSource::with_stream(42, 7);
        let a = haar_unitary_matrix(4, &mut src.rng());
        let b = haar_unitary_matrix(4, &mut src.rng());
        assert_eq!(a, b);
        let other = haar_unitary_matrix(4, &mut src.substream(1).rng());
        assert_ne!(a, other);
        assert_ne!(src.substream(1), src.substream(2));
    }

    #[test]
    fn one_dimensional_haar_is_a_phase() {
        let u = haar_unitary_matrix(1, &mut SeededSource::new(3).rng());
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_draws_are_unitary() {
        let src = SeededSource::new(11);
        for i in 0..100 {
            let u = haar_unitary_matrix(16, &mut src.substream(i).rng());
            assert!(isometry_defect(&u) < 1e-10);
        }
    }

    #[test]
    fn qubit_weyl_set_is_pauli() {
        let w = weyl_matrices(2);
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, real(1.0), real(1.0), ZERO]);
        let z = CMatrix::from_row_slice(2, 2, &[real(1.0), ZERO, ZERO, real(-1.0)]);
        assert!(max_abs(&(&w[0] - CMatrix::identity(2, 2))) < 1e-15);
        assert!(max_abs(&(&w[1] - &z)) < 1e-15);
        assert!(max_abs(&(&w[2] - &x)) < 1e-15);
        assert!(max_abs(&(&w[3] - &x * &z)) < 1e-15);
    }

    #[test]
    fn weyl_orthogonality() {
        for d in 1..6 {
            let w = weyl_matrices(d);
            for (i, a) in w.iter().enumerate() {
                for (j, b) in w.iter().enumerate() {
                    let ip = (a.adjoint() * b).trace();
                    let expected = if i == j { d as f64 } else { 0.0 };
                    assert!((ip - real(expected)).norm() < 1e-12, "d={d} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn schur_projection_of_identity_and_swap() {
        let f = LinearOp::swap(3);
        let p = twirl_schur_project(&f);
        assert!(p.identity_coeff.norm() < 1e-14 && (p.swap_coeff - real(1.0)).norm() < 1e-14);
        assert!(p.residual < 1e-14);
        let p = twirl_schur_project(&CMatrix::identity(9, 9));
        assert!((p.identity_coeff - real(1.0)).norm() < 1e-14 && p.swap_coeff.norm() < 1e-14);
        assert!(p.residual < 1e-14);
    }
}
