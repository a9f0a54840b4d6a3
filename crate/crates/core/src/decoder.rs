//! Constructive Uhlmann decoder: from a purified joint state `ψ^{RBE}`, an
//! isometry `W: B → R̂ ⊗ B'` aligning `ψ` with `Φ^{RR̂} ⊗ ξ^{B'E}`.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, orthonormal_completion, real, svd, CMatrix, ZERO};
use crate::metrics::{fidelity_matrices, fidelity_pure, trace_norm_hermitian};
use crate::tensor::{maximally_entangled_on, DensityOperator, LinearOp, StateVector, TensorSpace};

/// Label of the decoder's output copy of `R`.
pub const R_HAT: &str = "R^";
/// Label of the decoder's junk register.
pub const B_PRIME: &str = "B'";

#[derive(Clone, Debug)]
pub struct DecoderResult {
    /// Isometry `B → R̂ ⊗ B'`.
    pub w: LinearOp,
    /// `|⟨Φ ⊗ ξ| (I ⊗ W) |ψ⟩|²`.
    pub achieved_fidelity: f64,
    /// `‖ψ^{RE} − π ⊗ ψ^E‖₁`.
    pub decoupling_tdist: f64,
    /// `F(ψ^{RE}, π ⊗ ψ^E)` computed from matrix square roots.
    pub uhlmann_fidelity: f64,
    /// `⟨Φ| (I ⊗ D)(ψ^{RB}) |Φ⟩` for the decoding channel `D = Tr_{B'} W·W†`.
    pub channel_fidelity: f64,
    /// Dimension of `B'`.
    pub junk_dim: usize,
}

impl DecoderResult {
    /// Decoding channel `B → R̂` with Kraus operators `(I ⊗ ⟨b'|) W`.
    pub fn channel(&self) -> Channel {
        decoder_channel(self.w.matrix(), self.junk_dim)
    }
}

fn decoder_channel(w: &CMatrix, junk: usize) -> Channel {
    let r_hat = w.nrows() / junk;
    let b = w.ncols();
    let kraus = (0..junk)
        .map(|bp| CMatrix::from_fn(r_hat, b, |r, col| w[(r * junk + bp, col)]))
        .collect();
    Channel::with_tolerance("uhlmann-decoder", b, r_hat, kraus, 1e-8).expect("isometry yields a channel")
}

/// [`build_decoder_labeled`] for factors labeled `R`, `B`, `E`.
pub fn build_decoder(psi: &StateVector) -> Result<DecoderResult> {
    build_decoder_labeled(psi, "R", "B", "E")
}

/// Builds the decoder for a normalized `ψ` over exactly the three given factors.
///
/// The junk register has dimension `max(|B|, |E|)` so that it can always hold
/// a purification of `ψ^E`.
pub fn build_decoder_labeled(psi: &StateVector, r: &str, b: &str, e: &str) -> Result<DecoderResult> {
    if psi.space().len() != 3 {
        return Err(Error::InvalidState(format!("expected a state on R⊗B⊗E, got {}", psi.space())));
    }
    if (psi.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState("decoder input must be normalized".into()));
    }
    let r_dim = psi.space().dim_of(r)?;
    let b_dim = psi.space().dim_of(b)?;
    let e_dim = psi.space().dim_of(e)?;
    let junk = b_dim.max(e_dim);

    let psi_re = psi.reduced(&[r, e])?;
    let psi_e = psi.reduced(&[e])?;
    let pi = identity(r_dim) * real(1.0 / r_dim as f64);
    let target = kron(&pi, psi_e.matrix());

    // M_σ over rows (r, e) and columns (r̂, b'): δ_{r r̂} √λ_{b'} v_{b'}[e] / √|R|
    let (vals, vecs) = psi_e.eigen();
    let norm = 1.0 / (r_dim as f64).sqrt();
    let m_sigma = CMatrix::from_fn(r_dim * e_dim, r_dim * junk, |row, col| {
        let (ri, ei) = (row / e_dim, row % e_dim);
        let (rh, bp) = (col / junk, col % junk);
        if ri != rh || bp >= vals.len() || vals[bp] <= 1e-12 {
            return ZERO;
        }
        vecs[(ei, bp)] * real(vals[bp].sqrt() * norm)
    });
    let (m_psi, _, _) = psi.as_matrix(&[r, e])?;

    let x = m_sigma.adjoint() * &m_psi;
    let (u, s, v_t) = svd(&x);
    let kept: Vec<usize> = (0..s.len()).filter(|&i| s[i] > 1e-12).collect();
    let u_kept = CMatrix::from_fn(u.nrows(), kept.len(), |i, j| u[(i, kept[j])]);
    let v = v_t.adjoint();
    let v_kept = CMatrix::from_fn(v.nrows(), kept.len(), |i, j| v[(i, kept[j])]);
    let u_full = orthonormal_completion(&u_kept, b_dim);
    let v_full = orthonormal_completion(&v_kept, b_dim);
    // maximizes Re Tr(X Wᵀ)
    let w = u_full.conjugate() * v_full.transpose();

    let overlap = m_sigma
        .iter()
        .zip((&m_psi * w.transpose()).iter())
        .fold(ZERO, |acc, (s, p)| acc + s.conj() * p);

    let out_space = TensorSpace::new([(R_HAT, r_dim), (B_PRIME, junk)])?;
    let w_op = LinearOp::isometry(TensorSpace::single(b, b_dim)?, out_space, w)?;
    let channel = decoder_channel(w_op.matrix(), junk);
    let rho_rb = psi.reduced(&[r, b])?;
    let decoded = rho_rb.apply_channel(b, &channel, R_HAT)?;
    let phi = maximally_entangled_on(r, R_HAT, r_dim)?;

    Ok(DecoderResult {
        achieved_fidelity: overlap.norm_sqr(),
        decoupling_tdist: trace_norm_hermitian(&(psi_re.matrix() - &target)),
        uhlmann_fidelity: fidelity_matrices(psi_re.matrix(), &target),
        channel_fidelity: fidelity_pure(&phi, &decoded)?,
        w: w_op,
        junk_dim: junk,
    })
}

/// `F(Φ^{RR̂}, (I ⊗ D ∘ N^{⊗n})(Υ))` for an encoding `Υ` on `R ⊗ A'` where
/// `A'` has dimension `N.in_dim()^n` (copies in row-major order).
pub fn entanglement_fidelity(encoding: &StateVector, channel: &Channel, n: usize, decoder: &Channel) -> Result<f64> {
    let space = encoding.space();
    if space.len() != 2 {
        return Err(Error::InvalidState(format!("encoding must live on R⊗A', got {}", space)));
    }
    let r = space.factors()[0].clone();
    let a = space.factors()[1].clone();
    let expected = channel.in_dim().checked_pow(n as u32).unwrap_or(usize::MAX);
    if a.dim != expected {
        return Err(Error::DimensionMismatch { expected, got: a.dim });
    }
    let out_dim = channel.out_dim().pow(n as u32);
    if decoder.in_dim() != out_dim || decoder.out_dim() != r.dim {
        return Err(Error::DimensionMismatch {
            expected: out_dim,
            got: decoder.in_dim(),
        });
    }
    crate::check_budget((r.dim as u128 * out_dim as u128).pow(2))?;
    let ins: Vec<String> = (0..n).map(|i| format!("A'{i}")).collect();
    let outs: Vec<String> = (0..n).map(|i| format!("B{i}")).collect();
    let parts: Vec<(&str, usize)> = ins.iter().map(|l| (l.as_str(), channel.in_dim())).collect();
    let mut rho = DensityOperator::from_pure(&encoding.relabeled(&a.label, "A'")?.relabeled(&r.label, "R")?)
        .split_factor("A'", &parts)?;
    for (i, o) in ins.iter().zip(&outs) {
        rho = rho.apply_channel(i, channel, o)?;
    }
    let out_labels: Vec<&str> = outs.iter().map(String::as_str).collect();
    let rho = rho.merge_factors(&out_labels, "B")?.apply_channel("B", decoder, R_HAT)?;
    fidelity_pure(&maximally_entangled_on("R", R_HAT, r.dim)?, &rho)
}
