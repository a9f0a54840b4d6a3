//! Method of types on `A^n`, typical projectors, and the Schmidt-flattening
//! construction that turns `|φ⟩^{⊗n}` into a code state maximally mixed on a
//! subspace `S` of a type class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, real, CMatrix, CVector, ONE, ZERO};
use crate::metrics::trace_norm_hermitian;
use crate::tensor::{DensityOperator, StateVector};

/// Empirical distribution of a length-`n` string, stored as symbol counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeVector {
    pub counts: Vec<usize>,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn dist_inf(&self, p: &[f64]) -> f64 {
        self.probabilities().iter().zip(p).map(|(t, p)| (t - p).abs()).fold(0.0, f64::max)
    }

    pub fn dist_l1(&self, p: &[f64]) -> f64 {
        self.probabilities().iter().zip(p).map(|(t, p)| (t - p).abs()).sum()
    }

    /// Whether the string with digits `x` has this type.
    pub fn matches(&self, x: &[usize]) -> bool {
        let mut counts = vec![0usize; self.counts.len()];
        for &s in x {
            counts[s] += 1;
        }
        counts == self.counts
    }
}

/// All types of length-`n` strings over `alphabet` symbols, with the first
/// count running from `n` down to `0` (then the second, and so on).
pub fn enumerate_types(n: usize, alphabet: usize) -> Vec<TypeVector> {
    fn rec(remaining: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<TypeVector>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(TypeVector::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for c in (0..=remaining).rev() {
            prefix.push(c);
            rec(remaining - c, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if alphabet > 0 {
        rec(n, alphabet, &mut Vec::with_capacity(alphabet), &mut out);
    }
    out
}

/// Multinomial coefficient `n! / Π counts!`.
pub fn type_class_dim(t: &TypeVector) -> u128 {
    let mut result: u128 = 1;
    let mut total = 0u128;
    for &c in &t.counts {
        for k in 1..=c as u128 {
            total += 1;
            // running binomial product stays integral
            result = result * total / k;
        }
    }
    result
}

/// Base-`base` digits of `idx`, most significant first.
pub(crate) fn digits(mut idx: usize, base: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in (0..n).rev() {
        out[slot] = idx % base;
        idx /= base;
    }
    out
}

/// `|u_{x_1}⟩ ⊗ … ⊗ |u_{x_n}⟩` for each listed string, as columns.
fn product_columns(u: &CMatrix, strings: &[Vec<usize>]) -> CMatrix {
    let d = u.nrows();
    let n = strings.first().map(|s| s.len()).unwrap_or(0);
    let total = d.pow(n as u32);
    let mut out = CMatrix::zeros(total, strings.len());
    for (col, x) in strings.iter().enumerate() {
        let mut v = CVector::from_element(1, ONE);
        for &s in x {
            let c = u.column(s);
            v = CVector::from_fn(v.len() * d, |i, _| v[i / d] * c[i % d]);
        }
        out.set_column(col, &v);
    }
    out
}

/// Type-class decomposition of `A^n` in the eigenbasis of a state `φ^A`.
#[derive(Clone, Debug)]
pub struct TypicalDecomposition {
    eigenvalues: Vec<f64>,
    eigenbasis: CMatrix,
    n: usize,
    delta: f64,
    types: Vec<TypeVector>,
    retained: Vec<bool>,
}

impl TypicalDecomposition {
    /// Eigen-decomposes `phi` (nonincreasing eigenvalues, canonical phases)
    /// and marks the types with `‖t − p‖_∞ ≤ δ`.
    pub fn new(phi: &DensityOperator, n: usize, delta: f64) -> Result<Self> {
        let (vals, vecs) = phi.eigen();
        Self::from_spectrum(vals, vecs, n, delta)
    }

    pub fn from_spectrum(eigenvalues: Vec<f64>, eigenbasis: CMatrix, n: usize, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("block length must be at least 1".into()));
        }
        if delta.is_nan() || delta < 0.0 {
            return Err(Error::InvalidParameter(format!("δ must be nonnegative, got {delta}")));
        }
        let d = eigenvalues.len();
        let full = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        crate::check_budget(full.saturating_mul(full))?;
        let p: Vec<f64> = eigenvalues.iter().map(|l| l.max(0.0)).collect();
        let types = enumerate_types(n, d);
        let retained = types.iter().map(|t| t.dist_inf(&p) <= delta + 1e-12).collect();
        Ok(Self {
            eigenvalues: p,
            eigenbasis,
            n,
            delta,
            types,
            retained,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenbasis(&self) -> &CMatrix {
        &self.eigenbasis
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn types(&self) -> &[TypeVector] {
        &self.types
    }

    pub fn retained_types(&self) -> Vec<&TypeVector> {
        self.types.iter().zip(&self.retained).filter(|(_, &r)| r).map(|(t, _)| t).collect()
    }

    pub fn is_retained(&self, t: &TypeVector) -> bool {
        self.types.iter().position(|x| x == t).map(|i| self.retained[i]).unwrap_or(false)
    }

    fn strings_where(&self, keep: impl Fn(&[usize]) -> bool) -> Vec<Vec<usize>> {
        let d = self.eigenvalues.len();
        (0..d.pow(self.n as u32))
            .map(|i| digits(i, d, self.n))
            .filter(|x| keep(x))
            .collect()
    }

    /// Orthonormal basis of the type class `A_t`, one column per string of
    /// type `t` in increasing string order.
    pub fn type_basis(&self, t: &TypeVector) -> CMatrix {
        let strings = self.strings_where(|x| t.matches(x));
        product_columns(&self.eigenbasis, &strings)
    }

    pub fn type_projector(&self, t: &TypeVector) -> CMatrix {
        let b = self.type_basis(t);
        &b * b.adjoint()
    }

    /// Orthonormal basis of the δ-typical subspace in increasing string order.
    pub fn typical_basis(&self) -> CMatrix {
        let kept = self.retained_types();
        let strings = self.strings_where(|x| kept.iter().any(|t| t.matches(x)));
        product_columns(&self.eigenbasis, &strings)
    }

    pub fn typical_projector(&self) -> CMatrix {
        let b = self.typical_basis();
        &b * b.adjoint()
    }

    /// Sum of the retained type-class dimensions.
    pub fn rank(&self) -> u128 {
        self.retained_types().into_iter().map(type_class_dim).sum()
    }
}

/// `typical_projector` as a free function.
pub fn typical_projector(phi: &DensityOperator, n: usize, delta: f64) -> Result<TypicalDecomposition> {
    TypicalDecomposition::new(phi, n, delta)
}

/// Output of the flattening construction. Coefficient matrices have rows
/// indexed by the type-class basis of `A_t` and columns by `B_δ ⊗ E_δ`
/// (basis coordinates of the typical subspaces) unless stated otherwise.
#[derive(Clone, Debug)]
pub struct FlattenedCode {
    pub n: usize,
    pub delta: f64,
    pub chosen_type: TypeVector,
    /// `‖φ_t − φ‖₁` for the chosen type.
    pub type_distance: f64,
    pub a_t_dim: usize,
    pub b_delta_dim: usize,
    pub e_delta_dim: usize,
    pub local_dims: [usize; 3],
    /// Entropies `H(A), H(B), H(E)` of `φ` in bits.
    pub entropies: [f64; 3],
    /// Schmidt coefficients `α_i` of `Ω'_δ`, nonincreasing.
    pub alphas: Vec<f64>,
    /// Indices of `α` kept in `S`, and those discarded.
    pub kept: Vec<usize>,
    pub discarded: Vec<usize>,
    /// Measured `ε = ‖Ω − Ω'_δ‖₁`.
    pub epsilon: f64,
    /// `A_t` basis of `A^n` (columns).
    pub type_basis: CMatrix,
    /// Basis of `S` inside `A^n` (columns).
    pub s_basis: CMatrix,
    /// `Ω'_δ` normalized.
    pub omega_prime: CMatrix,
    /// `Ψ_δ` normalized.
    pub psi_delta: CMatrix,
    /// `Tr Π^S Ω`.
    pub s_weight: f64,
    /// `|⟨Ψ|Ψ_δ⟩|`.
    pub psi_overlap: f64,
    /// Purities of `Ψ_δ^{B_δ}` and `Ω'^{B_δ}_δ`.
    pub psi_delta_b_purity: f64,
    pub omega_prime_b_purity: f64,
    /// `‖Ψ_δ^S − π_S‖₁`.
    pub psi_delta_s_defect: f64,
    /// Minimum eigenvalue of `Ω'^{A_t B}/(1 − 3√ε/2) − Ψ_δ^{SB}`, when
    /// `ε < 4/9` and the operator is small enough to diagonalize.
    pub domination_min_eig: Option<f64>,
}

impl FlattenedCode {
    pub fn s_dim(&self) -> usize {
        self.kept.len()
    }

    /// `ι = nH(A) − log₂|S|`.
    pub fn iota(&self) -> f64 {
        self.n as f64 * self.entropies[0] - (self.s_dim() as f64).log2()
    }

    /// `‖Ψ − Ψ_δ‖₁`.
    pub fn typ3_distance(&self) -> f64 {
        pure_distance(self.psi_overlap)
    }

    /// `‖Ψ − Ω‖₁ = 2√(1 − Tr Π^S Ω)`.
    pub fn gentle_distance(&self) -> f64 {
        pure_distance(self.s_weight.sqrt())
    }

    /// `‖Ψ_δ − Ω_δ‖₁ = 2√(1 − |S|/|A_t|)`.
    pub fn gentle_distance_flat(&self) -> f64 {
        pure_distance((self.s_dim() as f64 / self.a_t_dim as f64).sqrt())
    }

    /// `Σ_i |α_i − 1/|A_t||`.
    pub fn flattening_defect(&self) -> f64 {
        let inv = 1.0 / self.a_t_dim as f64;
        self.alphas.iter().map(|a| (a - inv).abs()).sum()
    }

    /// `‖Ω_δ − Ω'_δ‖₁ = 2√(1 − (Σ√α_i)²/|A_t|)`.
    pub fn flattening_distance(&self) -> f64 {
        let s: f64 = self.alphas.iter().map(|a| a.max(0.0).sqrt()).sum();
        pure_distance(s / (self.a_t_dim as f64).sqrt())
    }
}

/// `‖ψ − φ‖₁ = 2√(1 − |⟨ψ|φ⟩|²)` for normalized pure states.
fn pure_distance(overlap_abs: f64) -> f64 {
    2.0 * (1.0 - overlap_abs.min(1.0).powi(2)).max(0.0).sqrt()
}

/// Coefficients of `|φ⟩^{⊗n}` reordered to `A^n ⊗ B^n ⊗ E^n`, as a matrix
/// with rows over `A^n` and columns over `B^n E^n`.
fn tensor_power_coeffs(phi: &StateVector, n: usize) -> Result<(CMatrix, [usize; 3])> {
    let phi = phi.permuted(&["A", "B", "E"])?;
    let dims = phi.space().dims();
    let (a, b, e) = (dims[0], dims[1], dims[2]);
    let (an, bn, en) = (a.pow(n as u32), b.pow(n as u32), e.pow(n as u32));
    crate::check_budget(an as u128 * bn as u128 * en as u128)?;
    let amps = phi.amplitudes();
    let mut out = CMatrix::zeros(an, bn * en);
    for ia in 0..an {
        let xa = digits(ia, a, n);
        for ib in 0..bn {
            let xb = digits(ib, b, n);
            for ie in 0..en {
                let xe = digits(ie, e, n);
                let mut z = ONE;
                for j in 0..n {
                    z *= amps[(xa[j] * b + xb[j]) * e + xe[j]];
                    if z == ZERO {
                        break;
                    }
                }
                out[(ia, ib * en + ie)] = z;
            }
        }
    }
    Ok((out, [a, b, e]))
}

/// Rows over `A_t`, columns over `B^n E^n` → columns over `B_δ E_δ` coordinates.
fn project_columns(m: &CMatrix, vb: &CMatrix, ve: &CMatrix) -> CMatrix {
    let (bn, en) = (vb.nrows(), ve.nrows());
    let (kb, ke) = (vb.ncols(), ve.ncols());
    let vb_adj = vb.adjoint();
    let ve_conj = ve.conjugate();
    let mut out = CMatrix::zeros(m.nrows(), kb * ke);
    for i in 0..m.nrows() {
        let r = CMatrix::from_fn(bn, en, |x, y| m[(i, x * en + y)]);
        let t = &vb_adj * r * &ve_conj;
        for x in 0..kb {
            for y in 0..ke {
                out[(i, x * ke + y)] = t[(x, y)];
            }
        }
    }
    out
}

/// Reduced state on the middle factor of coefficients `c[i, (j, k)]` with
/// `k` running over `inner` values.
fn middle_marginal(c: &CMatrix, inner: usize) -> CMatrix {
    let mid = c.ncols() / inner;
    let mut rho = CMatrix::zeros(mid, mid);
    for i in 0..c.nrows() {
        let block = CMatrix::from_fn(mid, inner, |j, k| c[(i, j * inner + k)]);
        rho += &block * block.adjoint();
    }
    rho
}

/// Reduced state on (first ⊗ middle) factors of `c[i, (j, k)]`.
fn first_middle_marginal(c: &CMatrix, inner: usize) -> CMatrix {
    let mid = c.ncols() / inner;
    let rows = c.nrows() * mid;
    let x = CMatrix::from_fn(rows, inner, |r, k| c[(r / mid, (r % mid) * inner + k)]);
    &x * x.adjoint()
}

fn frob_inner(a: &CMatrix, b: &CMatrix) -> crate::C64 {
    a.iter().zip(b.iter()).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

/// Type closest to the spectrum in ℓ₁, with its distance. Ties go to the
/// lexicographically smallest counts; no type within `δ` is an error.
pub fn closest_type(dec: &TypicalDecomposition) -> Result<(TypeVector, f64)> {
    let p = dec.eigenvalues();
    let mut best: Option<(f64, &TypeVector)> = None;
    for t in dec.types() {
        let dist = t.dist_l1(p);
        best = match best {
            Some((bd, bt)) if dist > bd + 1e-12 || ((dist - bd).abs() <= 1e-12 && t >= bt) => Some((bd, bt)),
            _ => Some((dist, t)),
        };
    }
    let (distance, chosen) = best.expect("at least one type");
    if distance > dec.delta() + 1e-12 {
        return Err(Error::NoTypeWithinDelta {
            n: dec.n(),
            delta: dec.delta(),
            min_distance: distance,
        });
    }
    Ok((chosen.clone(), distance))
}

/// Runs the flattening construction on `|φ⟩^{ABE}` (factors labeled `A`, `B`,
/// `E`) at block length `n` and typicality parameter `δ`.
pub fn flatten_code(phi_abe: &StateVector, n: usize, delta: f64) -> Result<FlattenedCode> {
    let rho_a = phi_abe.reduced(&["A"])?;
    let rho_b = phi_abe.reduced(&["B"])?;
    let rho_e = phi_abe.reduced(&["E"])?;
    let dec_a = TypicalDecomposition::new(&rho_a, n, delta)?;
    let dec_b = TypicalDecomposition::new(&rho_b, n, delta)?;
    let dec_e = TypicalDecomposition::new(&rho_e, n, delta)?;

    let (chosen, type_distance) = closest_type(&dec_a)?;

    let (coeffs, local_dims) = tensor_power_coeffs(phi_abe, n)?;
    let vt = dec_a.type_basis(&chosen);
    let vb = dec_b.typical_basis();
    let ve = dec_e.typical_basis();
    let a_t_dim = vt.ncols();
    let (kb, ke) = (vb.ncols(), ve.ncols());
    if kb == 0 || ke == 0 {
        return Err(Error::InvalidState("a δ-typical subspace of B or E is empty".into()));
    }

    let omega_tilde = vt.adjoint() * &coeffs;
    let omega_norm = omega_tilde.norm();
    let omega_prime_tilde = project_columns(&omega_tilde, &vb, &ve);
    let omega_prime_norm = omega_prime_tilde.norm();
    if omega_norm < 1e-300 || omega_prime_norm < 1e-300 {
        return Err(Error::InvalidState("projected state vanishes".into()));
    }
    let omega_prime = &omega_prime_tilde / real(omega_prime_norm);
    // ⟨Ω|Ω'⟩ only sees the part of Ω inside B_δ ⊗ E_δ
    let overlap = frob_inner(&(&omega_prime_tilde / real(omega_norm)), &omega_prime).norm();
    let epsilon = pure_distance(overlap);

    let gram = &omega_prime * omega_prime.adjoint();
    let (alphas, u) = hermitian_eigen(&gram);
    // exactly flat coefficients sit on the threshold when ε = 0
    let threshold = (1.0 - epsilon.sqrt()) / a_t_dim as f64 - 1e-12;
    let (kept, discarded): (Vec<usize>, Vec<usize>) =
        (0..a_t_dim).partition(|&i| alphas[i] > threshold && alphas[i] > 1e-14);
    if kept.is_empty() {
        return Err(Error::InvalidState("every Schmidt coefficient was discarded".into()));
    }
    let s_dim = kept.len();

    let u_s = CMatrix::from_fn(a_t_dim, s_dim, |r, c| u[(r, kept[c])]);
    let mut psi_delta = CMatrix::zeros(a_t_dim, kb * ke);
    for (c, &i) in kept.iter().enumerate() {
        // ω_i = Ω'ᵀ ū_i / √α_i
        let omega_i = omega_prime.transpose() * u_s.column(c).conjugate() / real(alphas[i].sqrt());
        psi_delta += u_s.column(c) * omega_i.transpose();
    }
    psi_delta /= real((s_dim as f64).sqrt());

    let proj_s = &u_s * u_s.adjoint();
    let psi_tilde = &proj_s * &omega_tilde / real(omega_norm);
    let s_weight = psi_tilde.norm_squared();
    let psi_reduced = project_columns(&psi_tilde, &vb, &ve) / real(s_weight.sqrt());
    let psi_overlap = frob_inner(&psi_reduced, &psi_delta).norm();

    let psi_delta_b = middle_marginal(&psi_delta, ke);
    let omega_prime_b = middle_marginal(&omega_prime, ke);
    let psi_delta_s = u_s.adjoint() * &psi_delta * psi_delta.adjoint() * &u_s;
    let psi_delta_s_defect = trace_norm_hermitian(&(psi_delta_s - CMatrix::identity(s_dim, s_dim) / real(s_dim as f64)));

    let denom = 1.0 - 1.5 * epsilon.sqrt();
    let domination_min_eig = if denom > 0.0 && a_t_dim * kb <= 512 {
        let d = first_middle_marginal(&omega_prime, ke) / real(denom) - first_middle_marginal(&psi_delta, ke);
        hermitian_eigenvalues(&d).last().copied()
    } else {
        None
    };

    Ok(FlattenedCode {
        n,
        delta,
        chosen_type: chosen,
        type_distance,
        a_t_dim,
        b_delta_dim: kb,
        e_delta_dim: ke,
        local_dims,
        entropies: [rho_a.entropy(), rho_b.entropy(), rho_e.entropy()],
        psi_delta_b_purity: crate::metrics::purity(&psi_delta_b),
        omega_prime_b_purity: crate::metrics::purity(&omega_prime_b),
        s_basis: &vt * &u_s,
        type_basis: vt,
        alphas,
        kept,
        discarded,
        epsilon,
        omega_prime,
        psi_delta,
        s_weight,
        psi_overlap,
        psi_delta_s_defect,
        domination_min_eig,
    })
}

/// Rounding allowance for `≤` checks that can hold with equality.
pub const CHECK_TOL: f64 = 1e-12;

/// One inequality `lhs ≤ rhs` (or `<` where noted in the name).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: Option<f64>,
    pub pass: bool,
    pub slack: Option<f64>,
    /// False for diagnostics of intermediate steps.
    pub required: bool,
}

impl BoundCheck {
    fn le(name: &str, lhs: f64, rhs: f64, required: bool) -> Self {
        let finite = rhs.is_finite();
        Self {
            name: name.into(),
            lhs,
            rhs: finite.then_some(rhs),
            pass: finite && lhs <= rhs + CHECK_TOL,
            slack: finite.then_some(rhs - lhs),
            required,
        }
    }

    fn lt(name: &str, lhs: f64, rhs: f64, required: bool) -> Self {
        let mut b = Self::le(name, lhs, rhs, required);
        b.pass = rhs.is_finite() && lhs < rhs;
        b
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TypicalityDims {
    pub a_t: usize,
    pub s: usize,
    pub b_delta: usize,
    pub e_delta: usize,
    pub discarded: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TypicalityReport {
    pub n: usize,
    pub delta: f64,
    #[serde(rename = "type")]
    pub type_counts: Vec<usize>,
    pub dims: TypicalityDims,
    pub epsilon_measured: f64,
    /// `c'` from `(1 − 3√ε/2)^{-2} = 2^{n(c'−1)δ}`; absent when `ε ≥ 4/9`.
    pub c_prime: Option<f64>,
    pub iota: f64,
    pub bounds: Vec<BoundCheck>,
}

impl TypicalityReport {
    /// All checks marked `required` pass.
    pub fn required_pass(&self) -> bool {
        self.bounds.iter().filter(|b| b.required).all(|b| b.pass)
    }

    /// All checks marked `required` pass with slack above [`CHECK_TOL`].
    pub fn required_strict(&self) -> bool {
        self.bounds.iter().filter(|b| b.required).all(|b| b.pass && b.slack.is_some_and(|s| s > CHECK_TOL))
    }

    pub fn bound(&self, name: &str) -> Option<&BoundCheck> {
        self.bounds.iter().find(|b| b.name == name)
    }
}

/// Evaluates both sides of each typicality bound on a built code.
pub fn verify_typ_bounds(code: &FlattenedCode) -> TypicalityReport {
    let n = code.n as f64;
    let [_, h_b, h_e] = code.entropies;
    let eps = code.epsilon;
    let denom = 1.0 - 1.5 * eps.sqrt();
    let c_prime = (denom > 0.0).then(|| 1.0 - 2.0 * denom.log2() / (n * code.delta));
    let at = code.a_t_dim as f64;
    let quarter = eps.powf(0.25);
    let mut bounds = vec![
        BoundCheck::le("typ1_env_dim", code.e_delta_dim as f64, 2f64.powf(n * (h_e + code.delta)), true),
        BoundCheck::le(
            "typ2_purity_cprime",
            code.psi_delta_b_purity,
            c_prime.map_or(f64::INFINITY, |c| 2f64.powf(-n * h_b + n * c * code.delta)),
            true,
        ),
        BoundCheck::le("typ2_purity_strict", code.psi_delta_b_purity, 2f64.powf(-n * (h_b - code.delta)), false),
        BoundCheck::le("omega_prime_purity", code.omega_prime_b_purity, 2f64.powf(-n * (h_b - code.delta)), false),
        BoundCheck::le("typ3_trace_distance", code.typ3_distance(), eps, true),
        BoundCheck::le(
            "typ3_proof_chain",
            code.typ3_distance(),
            2.0 * eps + 2.0 * std::f64::consts::SQRT_2 * quarter,
            false,
        ),
        BoundCheck::lt("dimension", (1.0 - eps.sqrt() / 2.0) * at, code.s_dim() as f64, true),
        BoundCheck::le("discard_count", code.discarded.len() as f64, eps.sqrt() * at / 2.0, false),
        BoundCheck::le("flattening_proximity", code.flattening_defect(), eps, false),
        BoundCheck::le("gentle_measurement", code.gentle_distance(), std::f64::consts::SQRT_2 * quarter, true),
        BoundCheck::le(
            "gentle_measurement_flat",
            code.gentle_distance_flat(),
            std::f64::consts::SQRT_2 * quarter,
            false,
        ),
        BoundCheck::le("maximally_mixed_s", code.psi_delta_s_defect, 1e-10, false),
    ];
    if let Some(min) = code.domination_min_eig {
        bounds.push(BoundCheck::le("domination", -min, 1e-9, false));
    }
    TypicalityReport {
        n: code.n,
        delta: code.delta,
        type_counts: code.chosen_type.counts.clone(),
        dims: TypicalityDims {
            a_t: code.a_t_dim,
            s: code.s_dim(),
            b_delta: code.b_delta_dim,
            e_delta: code.e_delta_dim,
            discarded: code.discarded.len(),
        },
        epsilon_measured: eps,
        c_prime,
        iota: code.iota(),
        bounds,
    }
}

/// Post-measurement disturbance for a projection `Π` on a state `ρ`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GentleMeasurement {
    /// `Tr Πρ`.
    pub weight: f64,
    /// `‖ρ − ΠρΠ/Tr Πρ‖₁`.
    pub distance: f64,
    /// `2√(1 − Tr Πρ)`.
    pub bound: f64,
}

pub fn gentle_measurement(rho: &CMatrix, projector: &CMatrix) -> Result<GentleMeasurement> {
    if rho.shape() != projector.shape() || rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            got: projector.nrows(),
        });
    }
    let weight = (projector * rho).trace().re;
    if weight <= 0.0 {
        return Err(Error::InvalidState("projection annihilates the state".into()));
    }
    let post = projector * rho * projector / real(weight);
    Ok(GentleMeasurement {
        weight,
        distance: trace_norm_hermitian(&(rho - post)),
        bound: 2.0 * (1.0 - weight).max(0.0).sqrt(),
    })
}
