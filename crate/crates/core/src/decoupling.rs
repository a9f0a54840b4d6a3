//! One-shot decoupling: the random-subspace state family `ψ_U`, its
//! Hilbert–Schmidt distance from the decoupled state, the exact Haar average
//! of that distance, Monte-Carlo estimates and the trace-norm bound.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{identity, isometry_defect, kron, real, CMatrix};
use crate::metrics::{hs_norm_sq, purity, trace_norm_hermitian};
use crate::random::{haar_unitary_matrix, weyl_matrices, SeededSource};
use crate::tensor::{DensityOperator, LinearOp, TensorSpace};

/// Tolerance on `‖Ψ^S − π‖₁` for a valid instance.
pub const MARGINAL_TOL: f64 = 1e-8;

/// A state `Ψ^{SE}` that is maximally mixed on `S`, together with a code
/// subspace `R ⊆ S` given by orthonormal basis columns.
#[derive(Clone, Debug)]
pub struct DecouplingInstance {
    psi_se: DensityOperator,
    code_basis: CMatrix,
    s_dim: usize,
    r_dim: usize,
    e_dim: usize,
}

impl DecouplingInstance {
    /// `psi_se` must have exactly two factors (system, environment); they are
    /// relabeled `S` and `E`.
    pub fn new(psi_se: DensityOperator, code_basis: CMatrix) -> Result<Self> {
        let factors = psi_se.space().factors().to_vec();
        if factors.len() != 2 {
            return Err(Error::InvalidState(format!(
                "decoupling state needs two factors, got {}",
                psi_se.space()
            )));
        }
        let (s_dim, e_dim) = (factors[0].dim, factors[1].dim);
        let psi_se = DensityOperator::from_parts(
            TensorSpace::new([("S", s_dim), ("E", e_dim)])?,
            psi_se.matrix().clone(),
            psi_se.is_subnormalized(),
        );
        let marginal = psi_se.partial_trace(&["E"])?;
        let defect = trace_norm_hermitian(&(marginal.matrix() - identity(s_dim) * real(1.0 / s_dim as f64)));
        if defect > MARGINAL_TOL {
            return Err(Error::InvalidState(format!(
                "Ψ^S is not maximally mixed (‖Ψ^S − π‖₁ = {defect:e})"
            )));
        }
        if code_basis.nrows() != s_dim || code_basis.ncols() == 0 || code_basis.ncols() > s_dim {
            return Err(Error::CodeTooLarge {
                r_dim: code_basis.ncols(),
                s_dim,
            });
        }
        if isometry_defect(&code_basis) > crate::TOL {
            return Err(Error::InvalidOperator("code basis columns are not orthonormal".into()));
        }
        Ok(Self {
            r_dim: code_basis.ncols(),
            psi_se,
            code_basis,
            s_dim,
            e_dim,
        })
    }

    /// Code subspace spanned by the first `r_dim` computational basis vectors.
    pub fn with_leading_code(psi_se: DensityOperator, r_dim: usize) -> Result<Self> {
        let s_dim = psi_se.space().factors().first().map(|f| f.dim).unwrap_or(0);
        if r_dim == 0 || r_dim > s_dim {
            return Err(Error::CodeTooLarge { r_dim, s_dim });
        }
        Self::new(psi_se, CMatrix::identity(s_dim, r_dim))
    }

    /// `Ψ^{SE} = Tr_B (I ⊗ V_N) Φ^{SS'}`, the Choi state of the complementary channel.
    pub fn from_channel(channel: &Channel, r_dim: usize) -> Result<Self> {
        Self::with_leading_code(channel.complementary().choi(), r_dim)
    }

    /// Random instance: `Ψ^{SE}` is the Choi state of a random channel
    /// `S' → E` with `kraus_count` Kraus operators.
    pub fn random<R: Rng + ?Sized>(s_dim: usize, e_dim: usize, kraus_count: usize, r_dim: usize, rng: &mut R) -> Result<Self> {
        let ch = Channel::random(s_dim, e_dim, kraus_count, rng)?;
        Self::with_leading_code(ch.choi(), r_dim)
    }

    pub fn psi_se(&self) -> &DensityOperator {
        &self.psi_se
    }

    pub fn s_dim(&self) -> usize {
        self.s_dim
    }

    pub fn r_dim(&self) -> usize {
        self.r_dim
    }

    pub fn e_dim(&self) -> usize {
        self.e_dim
    }

    pub fn code_basis(&self) -> &CMatrix {
        &self.code_basis
    }

    /// Projection `P` onto the code subspace, as an `|S| × |S|` matrix.
    pub fn projector(&self) -> CMatrix {
        &self.code_basis * self.code_basis.adjoint()
    }

    /// `Tr[(Ψ^{SE})²]`.
    pub fn purity(&self) -> f64 {
        self.psi_se.purity()
    }

    /// `Tr[(Ψ^E)²]`.
    pub fn env_purity(&self) -> f64 {
        self.psi_se.partial_trace(&["S"]).expect("label S").purity()
    }

    /// Same state with a different code dimension.
    pub fn with_code_dim(&self, r_dim: usize) -> Result<Self> {
        Self::with_leading_code(self.psi_se.clone(), r_dim)
    }
}

/// `ψ_U` and how far its trace is from one.
#[derive(Clone, Debug)]
pub struct PsiU {
    pub state: DensityOperator,
    pub trace_deviation: f64,
}

/// `ψ_U^{RE} = (|S|/|R|) (P U ⊗ I) Ψ^{SE} (U† P ⊗ I)` on factors `R ⊗ E`.
pub fn psi_u(inst: &DecouplingInstance, u: &LinearOp) -> Result<PsiU> {
    if u.in_space().total_dim() != inst.s_dim || !u.is_unitary() {
        return Err(Error::InvalidOperator(format!(
            "expected a unitary on a {}-dimensional S",
            inst.s_dim
        )));
    }
    Ok(psi_u_matrix(inst, u.matrix()))
}

pub(crate) fn psi_u_matrix(inst: &DecouplingInstance, u: &CMatrix) -> PsiU {
    let pu = inst.code_basis.adjoint() * u;
    let m = kron(&pu, &identity(inst.e_dim));
    let scale = inst.s_dim as f64 / inst.r_dim as f64;
    let rho = (&m * inst.psi_se.matrix() * m.adjoint()) * real(scale);
    let trace_deviation = (rho.trace().re - 1.0).abs();
    let space = TensorSpace::new([("R", inst.r_dim), ("E", inst.e_dim)]).expect("fixed labels");
    PsiU {
        state: DensityOperator::from_parts(space, rho, false),
        trace_deviation,
    }
}

/// `ψ^R ⊗ ψ^{rest}` helper: returns `(π^R ⊗ ψ^{rest}, ψ permuted with R first, |R|)`.
fn decoupled_reference(psi: &DensityOperator, r_label: &str) -> Result<(CMatrix, CMatrix, DensityOperator, usize)> {
    let r_dim = psi.space().dim_of(r_label)?;
    let rest_space = psi.space().without(&[r_label])?;
    let mut order = vec![r_label];
    order.extend(rest_space.labels());
    let psi_r_first = psi.permuted(&order)?;
    let psi_rest = psi.partial_trace(&[r_label])?;
    let reference = kron(&(identity(r_dim) * real(1.0 / r_dim as f64)), psi_rest.matrix());
    Ok((reference, psi_r_first.into_matrix(), psi_rest, r_dim))
}

/// `‖ψ^{RE} − π^R ⊗ ψ^E‖₂²`, cross-checked against
/// `Tr[(ψ^{RE})²] − Tr[(ψ^E)²]/|R|` to `1e-10`.
///
/// Rejects inputs whose `R` marginal is not maximally mixed to `1e-8`.
pub fn hs_distance_sq(psi: &DensityOperator, r_label: &str) -> Result<f64> {
    let r_dim = psi.space().dim_of(r_label)?;
    let rest = psi.space().without(&[r_label])?;
    let psi_r = psi.partial_trace(&rest.labels())?;
    let defect = trace_norm_hermitian(&(psi_r.matrix() - identity(r_dim) * real(1.0 / r_dim as f64)));
    if defect > MARGINAL_TOL {
        return Err(Error::InvalidState(format!(
            "R marginal is not maximally mixed (‖ψ^R − π‖₁ = {defect:e})"
        )));
    }
    let (reference, psi_m, psi_rest, r_dim) = decoupled_reference(psi, r_label)?;
    let lhs = hs_norm_sq(&(psi_m - reference));
    let rhs = psi.purity() - psi_rest.purity() / r_dim as f64;
    if (lhs - rhs).abs() > 1e-10 {
        return Err(Error::IdentityViolation(format!(
            "‖ψ − π⊗ψ^E‖₂² = {lhs} but Tr ψ² − Tr (ψ^E)²/|R| = {rhs}"
        )));
    }
    Ok(lhs)
}

/// `‖ψ^{RE} − π^R ⊗ ψ^E‖₁`.
pub fn trace_distance_to_decoupled(psi: &DensityOperator, r_label: &str) -> Result<f64> {
    let (reference, psi_m, _, _) = decoupled_reference(psi, r_label)?;
    Ok(trace_norm_hermitian(&(psi_m - reference)))
}

/// Closed-form Haar average of the squared Hilbert–Schmidt distance, plus
/// the relaxed bound `Tr[(Ψ^{SE})²]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HaarAverage {
    pub exact: f64,
    pub relaxed_bound: f64,
}

/// `((1 − |R|⁻²)/(1 − |S|⁻²)) · (Tr[(Ψ^{SE})²] − Tr[(Ψ^E)²]/|S|)`.
pub fn exact_haar_average_hs(inst: &DecouplingInstance) -> Result<HaarAverage> {
    if inst.s_dim < 2 {
        return Err(Error::InvalidParameter(
            "the closed-form average is singular for |S| = 1".into(),
        ));
    }
    let (s, r) = (inst.s_dim as f64, inst.r_dim as f64);
    let purity_se = inst.purity();
    let factor = (1.0 - 1.0 / (r * r)) / (1.0 - 1.0 / (s * s));
    Ok(HaarAverage {
        exact: factor * (purity_se - inst.env_purity() / s),
        relaxed_bound: purity_se,
    })
}

/// Finite average of the squared Hilbert–Schmidt distance over the `|S|²`
/// Weyl operators on `S`.
pub fn weyl_average_hs(inst: &DecouplingInstance) -> Result<f64> {
    let ws = weyl_matrices(inst.s_dim);
    let mut total = 0.0;
    for w in &ws {
        let psi = psi_u_matrix(inst, w);
        total += hs_distance_sq(&psi.state, "R")?;
    }
    Ok(total / ws.len() as f64)
}

/// Per-unitary distances used by the Monte-Carlo estimators.
#[derive(Clone, Copy, Debug)]
pub struct DistanceSample {
    pub hs_sq: f64,
    pub trace: f64,
    pub trace_deviation: f64,
}

pub fn distances_for(inst: &DecouplingInstance, u: &CMatrix) -> Result<DistanceSample> {
    let psi = psi_u_matrix(inst, u);
    Ok(DistanceSample {
        hs_sq: hs_distance_sq(&psi.state, "R")?,
        trace: trace_distance_to_decoupled(&psi.state, "R")?,
        trace_deviation: psi.trace_deviation,
    })
}

/// Draws `n_samples` Haar unitaries (sample `i` from `src.substream(i)`) and
/// evaluates both distances. Results are in sample-index order.
pub fn haar_samples(inst: &DecouplingInstance, n_samples: usize, src: &SeededSource) -> Result<Vec<DistanceSample>> {
    let one = |i: usize| -> Result<DistanceSample> {
        let mut rng = src.substream(i as u64).rng();
        let u = haar_unitary_matrix(inst.s_dim, &mut rng);
        distances_for(inst, &u)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n_samples).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_samples).map(one).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `‖ψ_U − π ⊗ ψ_U^E‖₂²`
    HsSquared,
    /// `‖ψ_U − π ⊗ ψ_U^E‖₁`
    Trace,
    /// `‖ψ_U − π ⊗ ψ_U^E‖₁²`
    TraceSquared,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::HsSquared => "hs2",
            Metric::Trace => "trace",
            Metric::TraceSquared => "trace2",
        }
    }

    pub fn of(self, s: &DistanceSample) -> f64 {
        match self {
            Metric::HsSquared => s.hs_sq,
            Metric::Trace => s.trace,
            Metric::TraceSquared => s.trace * s.trace,
        }
    }
}

/// Sample mean and standard error of the mean.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl Estimate {
    /// Mean and standard error, folded in index order.
    pub fn from_values(values: &[f64]) -> Estimate {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr: (var / n as f64).sqrt(),
            n_samples: n,
        }
    }
}

/// Monte-Carlo average of `metric` over Haar-random `U`.
pub fn mc_average(inst: &DecouplingInstance, metric: Metric, n_samples: usize, src: &SeededSource) -> Result<Estimate> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter("Monte-Carlo averages need n_samples ≥ 2".into()));
    }
    let samples = haar_samples(inst, n_samples, src)?;
    let values: Vec<f64> = samples.iter().map(|s| metric.of(s)).collect();
    Ok(Estimate::from_values(&values))
}

/// `√(|R| |E| Tr[(Ψ^{SE})²])`.
pub fn oneshot_bound(inst: &DecouplingInstance) -> f64 {
    (inst.r_dim as f64 * inst.e_dim as f64 * inst.purity()).sqrt()
}

/// Random `ψ^{RE}` with `ψ^R = π`: the reference half of `Φ^{RR'}` after a
/// random channel `R' → E` with `kraus_count` Kraus operators.
pub fn random_decoupling_state<R: Rng + ?Sized>(r_dim: usize, e_dim: usize, kraus_count: usize, rng: &mut R) -> Result<DensityOperator> {
    let ch = Channel::random(r_dim, e_dim, kraus_count, rng)?;
    let choi = ch.choi();
    Ok(DensityOperator::from_parts(
        TensorSpace::new([("R", r_dim), ("E", e_dim)])?,
        choi.into_matrix(),
        false,
    ))
}

/// Two-copy swap-trick purities: `Tr[(ρ⊗ρ)(F⊗F)]` and `Tr[(ρ⊗ρ)(I⊗F_E)]`
/// for a bipartite `ρ^{SE}`.
pub fn swap_trick_purities(rho: &DensityOperator) -> Result<(f64, f64)> {
    let factors = rho.space().factors();
    if factors.len() != 2 {
        return Err(Error::InvalidState("swap trick needs a bipartite state".into()));
    }
    let (ds, de) = (factors[0].dim, factors[1].dim);
    let two = kron(rho.matrix(), rho.matrix());
    // two-copy space ordered S E S~ E~; reorder to S S~ E E~
    let perm = LinearOp::permutation(
        &TensorSpace::new([("S", ds), ("E", de), ("S~", ds), ("E~", de)])?,
        &["S", "S~", "E", "E~"],
    )?;
    let two = perm.matrix() * two * perm.matrix().adjoint();
    let ff = kron(&LinearOp::swap(ds), &LinearOp::swap(de));
    let ief = kron(&identity(ds * ds), &LinearOp::swap(de));
    Ok(((&two * ff).trace().re, (&two * ief).trace().re))
}

/// Direct purities for comparison with [`swap_trick_purities`].
pub fn direct_purities(rho: &DensityOperator) -> Result<(f64, f64)> {
    let first = rho.space().factors()[0].label.clone();
    Ok((purity(rho.matrix()), rho.partial_trace(&[first.as_str()])?.purity()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::haar_unitary;
    use crate::tensor::TensorProduct;

    #[test]
    fn full_code_and_identity_unitary_returns_input() {
        let mut rng = SeededSource::new(1).rng();
        let inst = DecouplingInstance::random(3, 2, 3, 3, &mut rng).unwrap();
        let id = LinearOp::identity(TensorSpace::single("S", 3).unwrap());
        let psi = psi_u(&inst, &id).unwrap();
        assert!(crate::linalg::max_abs(&(psi.state.matrix() - inst.psi_se().matrix())) < 1e-14);
    }

    #[test]
    fn trivial_environment_gives_maximally_mixed_code() {
        let inst = DecouplingInstance::from_channel(&Channel::identity(4).unwrap(), 2).unwrap();
        assert_eq!(inst.e_dim(), 1);
        let mut rng = SeededSource::new(2).rng();
        for _ in 0..5 {
            let u = haar_unitary(4, &mut rng);
            let psi = psi_u(&inst, &u).unwrap().state;
            assert!(crate::linalg::max_abs(&(psi.matrix() - identity(2) * real(0.5))) < 1e-12);
            assert!(hs_distance_sq(&psi, "R").unwrap().abs() < 1e-14);
        }
        let avg = exact_haar_average_hs(&inst).unwrap();
        assert!(avg.exact.abs() < 1e-14);
        assert!((oneshot_bound(&inst) - (2.0f64 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn psi_u_rejects_non_unitary() {
        let inst = DecouplingInstance::from_channel(&Channel::erasure(2, 0.2).unwrap(), 1).unwrap();
        let m = LinearOp::new(
            TensorSpace::single("S", 2).unwrap(),
            TensorSpace::single("S", 2).unwrap(),
            identity(2) * real(2.0),
        )
        .unwrap();
        assert!(psi_u(&inst, &m).is_err());
    }

    #[test]
    fn single_dimensional_code_has_zero_distance() {
        let mut rng = SeededSource::new(5).rng();
        let rho = random_decoupling_state(1, 3, 2, &mut rng).unwrap();
        assert!(hs_distance_sq(&rho, "R").unwrap().abs() < 1e-14);
    }

    #[test]
    fn product_with_maximally_mixed_has_zero_distance() {
        let pi = DensityOperator::maximally_mixed(TensorSpace::single("R", 3).unwrap());
        let mut rng = SeededSource::new(6).rng();
        let sigma = random_decoupling_state(2, 2, 2, &mut rng).unwrap().partial_trace(&["R"]).unwrap();
        let prod = crate::tensor::tensor(&pi, &sigma).unwrap();
        assert!(hs_distance_sq(&prod, "R").unwrap().abs() < 1e-14);
        assert!(trace_distance_to_decoupled(&prod, "R").unwrap().abs() < 1e-12);
    }

    #[test]
    fn non_maximally_mixed_reference_is_rejected() {
        let space = TensorSpace::new([("R", 2), ("E", 2)]).unwrap();
        let v = crate::tensor::ket("R", 2, 0).unwrap().tensor(&crate::tensor::ket("E", 2, 0).unwrap()).unwrap();
        let rho = DensityOperator::new(space, v.projector().into_matrix()).unwrap();
        assert!(matches!(hs_distance_sq(&rho, "R"), Err(Error::InvalidState(_))));
    }

    #[test]
    fn singular_average_rejected() {
        let inst = DecouplingInstance::from_channel(&Channel::identity(1).unwrap(), 1).unwrap();
        assert!(exact_haar_average_hs(&inst).is_err());
    }

    #[test]
    fn instance_validation() {
        let space = TensorSpace::new([("S", 2), ("E", 1)]).unwrap();
        let v = crate::tensor::ket("S", 2, 0).unwrap().tensor(&crate::tensor::ket("E", 1, 0).unwrap()).unwrap();
        let rho = DensityOperator::new(space, v.projector().into_matrix()).unwrap();
        assert!(DecouplingInstance::with_leading_code(rho, 1).is_err());
        let inst = DecouplingInstance::from_channel(&Channel::erasure(2, 0.3).unwrap(), 2).unwrap();
        assert!(inst.with_code_dim(3).is_err());
        let p = inst.projector();
        assert!(crate::linalg::max_abs(&(&p * &p - &p)) < 1e-15);
        assert!(crate::linalg::max_abs(&(p.adjoint() - &p)) < 1e-15);
    }

    #[test]
    fn mc_needs_two_samples() {
        let inst = DecouplingInstance::from_channel(&Channel::erasure(2, 0.3).unwrap(), 1).unwrap();
        assert!(mc_average(&inst, Metric::HsSquared, 1, &SeededSource::new(0)).is_err());
    }
}
