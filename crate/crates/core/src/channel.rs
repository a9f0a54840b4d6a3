//! Quantum channels as Kraus sets, with Stinespring dilations, complementary
//! channels, Choi states and coherent information.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, identity, isometry_defect, kron, max_abs, real, CMatrix, ONE};
use crate::random::haar_unitary_matrix;
use crate::tensor::{maximally_entangled_on, DensityOperator, LinearOp, TensorSpace};
use crate::{dimension_budget, TOL};

/// Completely positive trace-preserving map stored as a Kraus set.
#[derive(Clone, Debug)]
pub struct Channel {
    name: String,
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<CMatrix>,
}

/// `V = Σ_k K_k ⊗ |k⟩_E`, an isometry from the channel input into `B ⊗ E`.
#[derive(Clone, Debug)]
pub struct StinespringIsometry {
    pub isometry: LinearOp,
    pub env_dim: usize,
}

impl Channel {
    /// Validates that every Kraus operator is `out_dim × in_dim` and that
    /// `Σ K†K = I` to the global tolerance.
    pub fn new(name: impl Into<String>, in_dim: usize, out_dim: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        Self::with_tolerance(name, in_dim, out_dim, kraus, TOL)
    }

    pub(crate) fn with_tolerance(
        name: impl Into<String>,
        in_dim: usize,
        out_dim: usize,
        kraus: Vec<CMatrix>,
        tol: f64,
    ) -> Result<Self> {
        let name = name.into();
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidChannel(format!("{name}: dimensions must be positive")));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidChannel(format!("{name}: empty Kraus set")));
        }
        let mut sum = CMatrix::zeros(in_dim, in_dim);
        for (i, k) in kraus.iter().enumerate() {
            if k.nrows() != out_dim || k.ncols() != in_dim {
                return Err(Error::InvalidChannel(format!(
                    "{name}: Kraus operator {i} is {}x{}, expected {out_dim}x{in_dim}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            sum += k.adjoint() * k;
        }
        let defect = max_abs(&(sum - identity(in_dim)));
        if defect > tol {
            return Err(Error::InvalidChannel(format!(
                "{name}: not trace preserving (max |ΣK†K − I| = {defect:e})"
            )));
        }
        Ok(Self {
            name,
            in_dim,
            out_dim,
            kraus,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn kraus_count(&self) -> usize {
        self.kraus.len()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `Σ_k K ρ K†` on raw matrices.
    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Applies the channel to a state on its whole input. A single-factor
    /// input keeps its label; otherwise the output factor is labeled `B`.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                got: rho.dim(),
            });
        }
        let label = match rho.space().factors() {
            [single] => single.label.clone(),
            _ => "B".to_string(),
        };
        Ok(DensityOperator::from_parts(
            TensorSpace::single(label, self.out_dim)?,
            self.apply_matrix(rho.matrix()),
            rho.is_subnormalized(),
        ))
    }

    /// Stinespring isometry on labels `A'` → `B ⊗ E`.
    pub fn stinespring(&self) -> StinespringIsometry {
        self.stinespring_labeled("A'", "B", "E")
            .expect("distinct fixed labels")
    }

    pub fn stinespring_labeled(&self, input: &str, output: &str, env: &str) -> Result<StinespringIsometry> {
        let env_dim = self.kraus.len();
        let v = self.dilation_matrix();
        let isometry = LinearOp::from_parts(
            TensorSpace::single(input, self.in_dim)?,
            TensorSpace::new([(output, self.out_dim), (env, env_dim)])?,
            v,
            true,
        );
        Ok(StinespringIsometry { isometry, env_dim })
    }

    /// Raw `(out·env) × in` dilation matrix, environment index fastest.
    pub fn dilation_matrix(&self) -> CMatrix {
        let env = self.kraus.len();
        let mut v = CMatrix::zeros(self.out_dim * env, self.in_dim);
        for (k, op) in self.kraus.iter().enumerate() {
            for b in 0..self.out_dim {
                for a in 0..self.in_dim {
                    v[(b * env + k, a)] = op[(b, a)];
                }
            }
        }
        v
    }

    /// Channel onto the environment: `ρ ↦ Tr_B V ρ V†`.
    pub fn complementary(&self) -> Channel {
        let env = self.kraus.len();
        let kraus = (0..self.out_dim)
            .map(|b| CMatrix::from_fn(env, self.in_dim, |k, a| self.kraus[k][(b, a)]))
            .collect();
        Channel {
            name: format!("complement({})", self.name),
            in_dim: self.in_dim,
            out_dim: env,
            kraus,
        }
    }

    /// Choi state `(I ⊗ N)(Φ^{AA'})` on factors `A` (reference) and `B` (output).
    pub fn choi(&self) -> DensityOperator {
        let phi = maximally_entangled_on("A", "A'", self.in_dim)
            .expect("positive input dimension")
            .projector();
        phi.apply_channel("A'", self, "B").expect("matching input dimension")
    }

    /// Inverse of [`Channel::choi`]. The first factor must be maximally
    /// mixed to `1e-8`.
    pub fn from_choi(name: impl Into<String>, rho: &DensityOperator) -> Result<Channel> {
        let factors = rho.space().factors();
        if factors.len() != 2 {
            return Err(Error::InvalidState(
                "a Choi state must have exactly two factors (input reference, output)".into(),
            ));
        }
        let (d_in, d_out) = (factors[0].dim, factors[1].dim);
        let marginal = rho.partial_trace(&[factors[1].label.as_str()])?;
        let defect = max_abs(&(marginal.matrix() - identity(d_in) * real(1.0 / d_in as f64)));
        if defect > 1e-8 {
            return Err(Error::InvalidState(format!(
                "reference marginal is not maximally mixed (defect {defect:e})"
            )));
        }
        let (vals, vecs) = hermitian_eigen(rho.matrix());
        let mut kraus = Vec::new();
        for (k, &lambda) in vals.iter().enumerate() {
            if lambda <= 1e-14 {
                continue;
            }
            let w = (d_in as f64 * lambda).sqrt();
            kraus.push(CMatrix::from_fn(d_out, d_in, |b, a| vecs[(a * d_out + b, k)] * w));
        }
        Channel::with_tolerance(name, d_in, d_out, kraus, 1e-8)
    }

    /// `N^{⊗n}` with all n-fold Kraus products materialized. Rejected when the
    /// total number of Kraus matrix entries exceeds the dimension budget.
    pub fn tensor_power(&self, n: usize) -> Result<Channel> {
        if n == 0 {
            return Err(Error::InvalidParameter("tensor power needs n ≥ 1".into()));
        }
        let required = (self.kraus.len() as u128)
            .checked_pow(n as u32)
            .and_then(|k| k.checked_mul((self.out_dim as u128 * self.in_dim as u128).checked_pow(n as u32)?))
            .unwrap_or(u128::MAX);
        let budget = dimension_budget();
        if required > budget {
            return Err(Error::BudgetExceeded { required, budget });
        }
        let mut kraus = self.kraus.clone();
        for _ in 1..n {
            kraus = kraus
                .iter()
                .flat_map(|a| self.kraus.iter().map(move |b| kron(a, b)))
                .collect();
        }
        Ok(Channel {
            name: format!("{}^{n}", self.name),
            in_dim: self.in_dim.pow(n as u32),
            out_dim: self.out_dim.pow(n as u32),
            kraus,
        })
    }

    /// `D ∘ N` (apply `self` first).
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if next.in_dim != self.out_dim {
            return Err(Error::DimensionMismatch {
                expected: self.out_dim,
                got: next.in_dim,
            });
        }
        let kraus = next
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        Channel::with_tolerance(format!("{}∘{}", next.name, self.name), self.in_dim, next.out_dim, kraus, 1e-9)
    }

    // -- built-in family ---------------------------------------------------

    pub fn identity(d: usize) -> Result<Channel> {
        Channel::new(format!("identity({d})"), d, d, vec![identity(d)])
    }

    /// `ρ ↦ (1−p)ρ ⊕ p|e⟩⟨e|`, the flag `|e⟩` being the last basis vector of a
    /// `d+1`-dimensional output.
    pub fn erasure(d: usize, p: f64) -> Result<Channel> {
        check_probability("erasure probability", p)?;
        let mut kraus = Vec::with_capacity(d + 1);
        let keep = CMatrix::from_fn(d + 1, d, |b, a| if a == b { real((1.0 - p).sqrt()) } else { c(0.0, 0.0) });
        kraus.push(keep);
        for a in 0..d {
            let mut k = CMatrix::zeros(d + 1, d);
            k[(d, a)] = real(p.sqrt());
            kraus.push(k);
        }
        Channel::new(format!("erasure({d},{p})"), d, d + 1, kraus)
    }

    /// `ρ ↦ (1−p)ρ + p·I/d`, realized with the `d²` Weyl operators.
    pub fn depolarizing(d: usize, p: f64) -> Result<Channel> {
        check_probability("depolarizing probability", p)?;
        let weyl = crate::random::weyl_matrices(d);
        let d2 = (d * d) as f64;
        let kraus = weyl
            .into_iter()
            .enumerate()
            .map(|(k, w)| {
                let weight = if k == 0 { 1.0 - p + p / d2 } else { p / d2 };
                w * real(weight.sqrt())
            })
            .collect();
        Channel::new(format!("depolarizing({d},{p})"), d, d, kraus)
    }

    /// Qubit dephasing with Kraus operators `{√(1−p) I, √p Z}`.
    pub fn dephasing(p: f64) -> Result<Channel> {
        check_probability("dephasing probability", p)?;
        let z = CMatrix::from_row_slice(2, 2, &[ONE, c(0.0, 0.0), c(0.0, 0.0), real(-1.0)]);
        Channel::new(
            format!("dephasing({p})"),
            2,
            2,
            vec![identity(2) * real((1.0 - p).sqrt()), z * real(p.sqrt())],
        )
    }

    /// Qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Channel> {
        check_probability("damping parameter", gamma)?;
        let k0 = CMatrix::from_row_slice(2, 2, &[ONE, c(0.0, 0.0), c(0.0, 0.0), real((1.0 - gamma).sqrt())]);
        let k1 = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), real(gamma.sqrt()), c(0.0, 0.0), c(0.0, 0.0)]);
        Channel::new(format!("amplitude_damping({gamma})"), 2, 2, vec![k0, k1])
    }

    /// Random channel whose dilation is the first `in_dim` columns of a Haar
    /// unitary on `out_dim · kraus_count`.
    pub fn random<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, kraus_count: usize, rng: &mut R) -> Result<Channel> {
        if out_dim * kraus_count < in_dim {
            return Err(Error::InvalidParameter(format!(
                "out_dim·kraus_count = {} must be at least in_dim = {in_dim}",
                out_dim * kraus_count
            )));
        }
        let u = haar_unitary_matrix(out_dim * kraus_count, rng);
        let kraus = (0..kraus_count)
            .map(|k| CMatrix::from_fn(out_dim, in_dim, |b, a| u[(b * kraus_count + k, a)]))
            .collect();
        Channel::new(format!("random({in_dim},{out_dim},{kraus_count})"), in_dim, out_dim, kraus)
    }

    /// Looks up a built-in channel by name.
    pub fn builtin(name: &str, params: &BuiltinParams) -> Result<Channel> {
        let d = params.d.unwrap_or(2);
        match name {
            "identity" => Channel::identity(d),
            "erasure" => Channel::erasure(d, params.p.ok_or_else(|| missing("p"))?),
            "depolarizing" => Channel::depolarizing(d, params.p.ok_or_else(|| missing("p"))?),
            "dephasing" => Channel::dephasing(params.p.ok_or_else(|| missing("p"))?),
            "amplitude_damping" => Channel::amplitude_damping(
                params.gamma.or(params.p).ok_or_else(|| missing("gamma"))?,
            ),
            other => Err(Error::InvalidParameter(format!("unknown built-in channel `{other}`"))),
        }
    }

    // -- JSON --------------------------------------------------------------

    pub fn to_document(&self) -> ChannelDocument {
        ChannelDocument {
            name: self.name.clone(),
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            kraus: self
                .kraus
                .iter()
                .map(|k| {
                    let mut flat = Vec::with_capacity(k.len());
                    for r in 0..k.nrows() {
                        for col in 0..k.ncols() {
                            flat.push([k[(r, col)].re, k[(r, col)].im]);
                        }
                    }
                    KrausEntries::Flat(flat)
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &ChannelDocument) -> Result<Channel> {
        let mut kraus = Vec::with_capacity(doc.kraus.len());
        for (i, entries) in doc.kraus.iter().enumerate() {
            let flat: Vec<[f64; 2]> = match entries {
                KrausEntries::Flat(v) => v.clone(),
                KrausEntries::Rows(rows) => {
                    if rows.len() != doc.out_dim || rows.iter().any(|r| r.len() != doc.in_dim) {
                        return Err(Error::InvalidChannel(format!(
                            "Kraus operator {i}: rows must form a {}x{} matrix",
                            doc.out_dim, doc.in_dim
                        )));
                    }
                    rows.iter().flatten().copied().collect()
                }
            };
            if flat.len() != doc.out_dim * doc.in_dim {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator {i}: {} entries, expected {}",
                    flat.len(),
                    doc.out_dim * doc.in_dim
                )));
            }
            kraus.push(CMatrix::from_row_iterator(
                doc.out_dim,
                doc.in_dim,
                flat.iter().map(|&p| crate::tensor::complex_from_pair(p)),
            ));
        }
        Channel::new(doc.name.clone(), doc.in_dim, doc.out_dim, kraus)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("channel document serializes")
    }

    pub fn from_json(s: &str) -> Result<Channel> {
        let doc: ChannelDocument = serde_json::from_str(s)?;
        Channel::from_document(&doc)
    }
}

fn missing(field: &str) -> Error {
    Error::InvalidParameter(format!("missing channel parameter `{field}`"))
}

fn check_probability(what: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidParameter(format!("{what} {p} outside [0, 1]")));
    }
    Ok(())
}

/// Parameters for [`Channel::builtin`].
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct BuiltinParams {
    pub d: Option<usize>,
    pub p: Option<f64>,
    pub gamma: Option<f64>,
}

/// JSON form: `{name, in_dim, out_dim, kraus}` where each Kraus operator is a
/// row-major list of `[re, im]` pairs. Nested rows are accepted on import.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDocument {
    pub name: String,
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<KrausEntries>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KrausEntries {
    Flat(Vec<[f64; 2]>),
    Rows(Vec<Vec<[f64; 2]>>),
}

impl StinespringIsometry {
    pub fn matrix(&self) -> &CMatrix {
        self.isometry.matrix()
    }

    pub fn defect(&self) -> f64 {
        isometry_defect(self.isometry.matrix())
    }
}

/// `I_c(φ, N) = H(B) − H(E)` evaluated on `V φ V†`.
pub fn coherent_information(phi: &DensityOperator, channel: &Channel) -> Result<f64> {
    if phi.dim() != channel.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.in_dim(),
            got: phi.dim(),
        });
    }
    Ok(coherent_information_matrix(phi.matrix(), channel))
}

pub(crate) fn coherent_information_matrix(phi: &CMatrix, channel: &Channel) -> f64 {
    let v = channel.dilation_matrix();
    let rho_be = &v * phi * v.adjoint();
    let space = TensorSpace::new([("B", channel.out_dim()), ("E", channel.kraus_count())]).expect("fixed labels");
    let rho = DensityOperator::from_parts(space, rho_be, false);
    let h_b = rho.partial_trace(&["E"]).expect("label E").entropy();
    let h_e = rho.partial_trace(&["B"]).expect("label B").entropy();
    h_b - h_e
}

/// `ρ_E` produced by the dilation, used by callers that need both marginals.
pub fn output_marginals(phi: &DensityOperator, channel: &Channel) -> Result<(DensityOperator, DensityOperator)> {
    let rho = channel.stinespring().isometry.conjugate(phi)?;
    Ok((rho.partial_trace(&["E"])?, rho.partial_trace(&["B"])?))
}

/// `|φ⟩^{ABE} = (I ⊗ V_N) Σ_k √λ_k |k⟩^A |v_k⟩^{A'}` for the eigen-decomposition
/// `φ = Σ λ_k |v_k⟩⟨v_k|`; the reference `A` carries `diag(λ)`.
pub fn purified_output(phi: &DensityOperator, channel: &Channel) -> Result<crate::tensor::StateVector> {
    if phi.dim() != channel.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.in_dim(),
            got: phi.dim(),
        });
    }
    let (vals, vecs) = phi.eigen();
    let v = channel.dilation_matrix();
    let d = channel.in_dim();
    let be = v.nrows();
    let mut amps = crate::linalg::CVector::zeros(d * be);
    for k in 0..d {
        let w = vals[k].max(0.0).sqrt();
        if w == 0.0 {
            continue;
        }
        let out = &v * vecs.column(k) * real(w);
        for j in 0..be {
            amps[k * be + j] = out[j];
        }
    }
    let space = TensorSpace::new([("A", d), ("B", channel.out_dim()), ("E", channel.kraus_count())])?;
    crate::tensor::StateVector::normalized_from(space, amps)
}

#[doc(hidden)]
pub fn kraus_mixture(channel: &Channel, mixing: &CMatrix) -> Result<Channel> {
    // K'_i = Σ_j u_ij K_j for an isometric mixing matrix u (rows ≥ cols)
    if mixing.ncols() != channel.kraus_count() {
        return Err(Error::DimensionMismatch {
            expected: channel.kraus_count(),
            got: mixing.ncols(),
        });
    }
    let kraus = (0..mixing.nrows())
        .map(|i| {
            channel
                .kraus()
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(channel.out_dim(), channel.in_dim()), |acc, (j, k)| acc + k * mixing[(i, j)])
        })
        .collect();
    Channel::with_tolerance(format!("mixed({})", channel.name()), channel.in_dim(), channel.out_dim(), kraus, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::binary_entropy;

    fn pi(d: usize) -> DensityOperator {
        DensityOperator::maximally_mixed(TensorSpace::single("A'", d).unwrap())
    }

    #[test]
    fn identity_dilation_is_trivial() {
        let v = Channel::identity(3).unwrap().stinespring();
        assert_eq!(v.env_dim, 1);
        assert!(max_abs(&(v.matrix() - identity(3))) < 1e-15);
    }

    #[test]
    fn dephasing_dilation_is_isometry() {
        let v = Channel::dephasing(0.5).unwrap().stinespring();
        assert_eq!(v.env_dim, 2);
        assert!(v.defect() < 1e-14);
    }

    #[test]
    fn identity_complement_is_constant() {
        let comp = Channel::identity(2).unwrap().complementary();
        assert_eq!(comp.out_dim(), 1);
        let out = comp.apply_matrix(&CMatrix::from_row_slice(2, 2, &[real(0.3), c(0.1, 0.2), c(0.1, -0.2), real(0.7)]));
        assert!((out[(0, 0)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn erasure_action() {
        let n = Channel::erasure(2, 0.3).unwrap();
        let out = n.apply(&pi(2)).unwrap();
        let expected = [0.35, 0.35, 0.3];
        for (i, e) in expected.iter().enumerate() {
            assert!((out.matrix()[(i, i)].re - e).abs() < 1e-15);
        }
        let zero = Channel::erasure(2, 0.0).unwrap();
        let mut embed = CMatrix::zeros(3, 2);
        embed[(0, 0)] = ONE;
        embed[(1, 1)] = ONE;
        assert!(max_abs(&(&zero.kraus()[0] - embed)) < 1e-15);
    }

    #[test]
    fn depolarizing_full_is_maximally_mixed() {
        let n = Channel::depolarizing(2, 1.0).unwrap();
        let rho = CMatrix::from_row_slice(2, 2, &[real(0.9), c(0.1, 0.2), c(0.1, -0.2), real(0.1)]);
        let out = n.apply_matrix(&rho);
        assert!(max_abs(&(out - identity(2) * real(0.5))) < 1e-15);
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(Channel::erasure(2, 1.5).is_err());
        assert!(Channel::depolarizing(2, -0.1).is_err());
        assert!(Channel::dephasing(f64::NAN).is_err());
        assert!(Channel::new("bad", 2, 2, vec![identity(2) * real(0.5)]).is_err());
    }

    #[test]
    fn choi_of_identity_and_full_depolarizing() {
        let j = Channel::identity(2).unwrap().choi();
        let phi = maximally_entangled_on("A", "B", 2).unwrap().projector();
        assert!(max_abs(&(j.matrix() - phi.matrix())) < 1e-15);
        let j = Channel::depolarizing(2, 1.0).unwrap().choi();
        assert!(max_abs(&(j.matrix() - identity(4) * real(0.25))) < 1e-15);
    }

    #[test]
    fn coherent_information_closed_forms() {
        for d in 1..5 {
            let ic = coherent_information(&pi(d), &Channel::identity(d).unwrap()).unwrap();
            assert!((ic - (d as f64).log2()).abs() < 1e-12);
        }
        let ic = coherent_information(&pi(2), &Channel::erasure(2, 0.25).unwrap()).unwrap();
        assert!((ic - 0.5).abs() < 1e-12);
        let p = 0.2;
        let ic = coherent_information(&pi(2), &Channel::depolarizing(2, p).unwrap()).unwrap();
        let q = 3.0 * p / 4.0;
        let expected = 1.0 - binary_entropy(q) - q * 3f64.log2();
        assert!((ic - expected).abs() < 1e-12);
    }

    #[test]
    fn tensor_power_basics() {
        let n = Channel::erasure(2, 0.3).unwrap();
        let one = n.tensor_power(1).unwrap();
        assert_eq!(one.kraus_count(), n.kraus_count());
        let id3 = Channel::identity(2).unwrap().tensor_power(3).unwrap();
        assert_eq!(id3.kraus_count(), 1);
        assert!(max_abs(&(&id3.kraus()[0] - identity(8))) < 1e-15);
        assert!(matches!(n.tensor_power(40), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn json_accepts_nested_rows() {
        let doc = r#"{"name":"x","in_dim":1,"out_dim":2,"kraus":[[[[1,0]],[[0,0]]]]}"#;
        let ch = Channel::from_json(doc).unwrap();
        assert_eq!(ch.out_dim(), 2);
        let bad = r#"{"name":"x","in_dim":1,"out_dim":2,"kraus":[[[1,0]]],"extra":1}"#;
        assert!(Channel::from_json(bad).is_err());
    }
}
