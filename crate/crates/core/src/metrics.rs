//! Norms, fidelities and entropies. Logs are base 2.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, psd_sqrt, singular_values, spectrum_entropy, CMatrix};
use crate::tensor::{DensityOperator, StateVector};

/// Sum of singular values.
pub fn trace_norm(x: &CMatrix) -> f64 {
    singular_values(x).iter().sum()
}

/// Trace norm of a Hermitian matrix via its eigenvalues.
pub fn trace_norm_hermitian(x: &CMatrix) -> f64 {
    hermitian_eigenvalues(x).iter().map(|l| l.abs()).sum()
}

/// `Σ |X_ij|²`.
pub fn hs_norm_sq(x: &CMatrix) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// `Tr ρ²` for Hermitian `ρ`.
pub fn purity(rho: &CMatrix) -> f64 {
    hs_norm_sq(rho)
}

/// `‖ρ − σ‖₁` (no factor 1/2).
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_space(rho, sigma)?;
    Ok(trace_norm_hermitian(&(rho.matrix() - sigma.matrix())))
}

/// `F(ρ, σ) = ‖√ρ √σ‖₁²`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_space(rho, sigma)?;
    Ok(fidelity_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn fidelity_matrices(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let (sr, _) = psd_sqrt(rho);
    let (ss, _) = psd_sqrt(sigma);
    let f = trace_norm(&(sr * ss)).powi(2);
    f.clamp(0.0, 1.0)
}

/// `⟨φ|ρ|φ⟩`.
pub fn fidelity_pure(phi: &StateVector, rho: &DensityOperator) -> Result<f64> {
    if phi.space() != rho.space() {
        return Err(Error::SpaceMismatch(format!("{} vs {}", phi.space(), rho.space())));
    }
    let v = phi.amplitudes();
    Ok((v.adjoint() * rho.matrix() * v)[(0, 0)].re)
}

/// Von Neumann entropy in bits; eigenvalues in `[-1e-10, 0)` count as zero.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    spectrum_entropy(&rho.eigenvalues())
}

/// `H₂(p) = −p log p − (1−p) log (1−p)`.
pub fn binary_entropy(p: f64) -> f64 {
    spectrum_entropy(&[p, 1.0 - p])
}

fn same_space(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch(format!("{} vs {}", a.space(), b.space())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use crate::tensor::{ket, TensorSpace};

    #[test]
    fn trace_norm_of_sign_matrix() {
        let m = CMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(-1.0)]);
        assert!((trace_norm(&m) - 2.0).abs() < 1e-14);
        assert!((trace_norm_hermitian(&m) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn purity_of_maximally_mixed() {
        for d in 1..6 {
            let pi = DensityOperator::maximally_mixed(TensorSpace::single("A", d).unwrap());
            assert!((pi.purity() - 1.0 / d as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn fidelity_edge_cases() {
        let zero = ket("A", 2, 0).unwrap().projector();
        let one = ket("A", 2, 1).unwrap().projector();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        let other = ket("B", 2, 0).unwrap().projector();
        assert!(matches!(fidelity(&zero, &other), Err(Error::SpaceMismatch(_))));
    }

    #[test]
    fn entropy_values() {
        let pure = ket("A", 3, 2).unwrap().projector();
        assert!(pure.entropy().abs() < 1e-12);
        for d in [2usize, 3, 5] {
            let pi = DensityOperator::maximally_mixed(TensorSpace::single("A", d).unwrap());
            assert!((pi.entropy() - (d as f64).log2()).abs() < 1e-12);
        }
        let s = TensorSpace::single("A", 2).unwrap();
        let rho = DensityOperator::new(
            s,
            CMatrix::from_row_slice(2, 2, &[real(0.75), real(0.0), real(0.0), real(0.25)]),
        )
        .unwrap();
        let direct = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!((rho.entropy() - direct).abs() < 1e-14);
        assert!((binary_entropy(0.25) - direct).abs() < 1e-14);
    }
}
