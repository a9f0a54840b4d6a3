//! Labeled tensor-product spaces and the states and operators that live on them.
//!
//! Storage is dense. Flat indices are row-major over the factor list (the last
//! factor varies fastest), which is the ordering produced by the Kronecker
//! product. Subsystem permutations are realized through explicit index maps.

use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, hermitian_eigen, hermitian_eigenvalues, hermiticity_defect, isometry_defect, kron,
    permutation_map, real, CMatrix, CVector, C64, ONE, ZERO,
};
use crate::{NORM_TOL, TOL};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

impl Factor {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
        }
    }
}

/// Ordered list of labeled finite-dimensional factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TensorSpace {
    factors: Vec<Factor>,
}

impl fmt::Display for TensorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "()");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|fa| format!("{}[{}]", fa.label, fa.dim))
            .collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

impl TensorSpace {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        Self::from_factors(factors.into_iter().map(|(l, d)| Factor::new(l, d)).collect())
    }

    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        for (i, fa) in factors.iter().enumerate() {
            if fa.dim == 0 {
                return Err(Error::ZeroDimension(fa.label.clone()));
            }
            if factors[..i].iter().any(|g| g.label == fa.label) {
                return Err(Error::DuplicateLabel(fa.label.clone()));
            }
        }
        Ok(Self { factors })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::from_factors(vec![Factor::new(label, dim)])
    }

    /// The one-dimensional space with no factors.
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.factors.iter().any(|f| f.label == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.position(label)?].dim)
    }

    /// Product dimension of a set of labels.
    pub fn dim_of_all(&self, labels: &[&str]) -> Result<usize> {
        labels.iter().map(|l| self.dim_of(l)).product()
    }

    pub fn concat(&self, other: &TensorSpace) -> Result<Self> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::from_factors(factors)
    }

    /// Positions of `labels`, rejecting unknown or repeated labels.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if out.contains(&p) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Space made of the given labels, in the given order.
    pub fn select(&self, labels: &[&str]) -> Result<Self> {
        let pos = self.positions(labels)?;
        Ok(Self {
            factors: pos.iter().map(|&p| self.factors[p].clone()).collect(),
        })
    }

    /// Space with the given labels removed, retaining the original order.
    pub fn without(&self, labels: &[&str]) -> Result<Self> {
        let pos = self.positions(labels)?;
        Ok(Self {
            factors: self
                .factors
                .iter()
                .enumerate()
                .filter(|(i, _)| !pos.contains(i))
                .map(|(_, f)| f.clone())
                .collect(),
        })
    }

    pub fn relabeled(&self, from: &str, to: &str) -> Result<Self> {
        let p = self.position(from)?;
        let mut factors = self.factors.clone();
        factors[p].label = to.to_string();
        Self::from_factors(factors)
    }

    /// Same labels with a prefix/suffix scheme applied to every factor.
    pub fn map_labels(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        Self::from_factors(
            self.factors
                .iter()
                .map(|fa| Factor::new(f(&fa.label), fa.dim))
                .collect(),
        )
    }

    fn complement_positions(&self, pos: &[usize]) -> Vec<usize> {
        (0..self.factors.len()).filter(|i| !pos.contains(i)).collect()
    }

    fn permuted(&self, order: &[usize]) -> Self {
        Self {
            factors: order.iter().map(|&k| self.factors[k].clone()).collect(),
        }
    }

    fn require_same(&self, other: &TensorSpace) -> Result<()> {
        if self != other {
            return Err(Error::SpaceMismatch(format!("{self} vs {other}")));
        }
        Ok(())
    }

    /// Factor order that lists `labels` first (in the given order) and the
    /// remaining factors afterwards in their current order.
    fn order_with_front(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let front = self.positions(labels)?;
        let mut order = front.clone();
        order.extend(self.complement_positions(&front));
        Ok(order)
    }

    /// Full order after merging `labels` into one factor placed where the
    /// earliest of them currently sits.
    fn merge_order(&self, labels: &[&str]) -> Result<(Vec<usize>, usize)> {
        let group = self.positions(labels)?;
        let anchor = *group.iter().min().expect("non-empty group");
        let mut order = Vec::with_capacity(self.factors.len());
        let mut anchor_slot = 0;
        for i in 0..self.factors.len() {
            if i == anchor {
                anchor_slot = order.len();
                order.extend(group.iter().copied());
            } else if !group.contains(&i) {
                order.push(i);
            }
        }
        Ok((order, anchor_slot))
    }
}

/// Applies `op` (out × in) to the factor at `pos` along the row index of `data`.
pub(crate) fn apply_rows(data: &CMatrix, dims: &[usize], pos: usize, op: &CMatrix) -> CMatrix {
    let pre: usize = dims[..pos].iter().product();
    let din = dims[pos];
    let post: usize = dims[pos + 1..].iter().product();
    let dout = op.nrows();
    assert_eq!(op.ncols(), din, "operator input dimension");
    let ncols = data.ncols();
    let mut out = CMatrix::zeros(pre * dout * post, ncols);
    for col in 0..ncols {
        let src = data.column(col);
        let mut dst = out.column_mut(col);
        for p in 0..pre {
            for i in 0..din {
                let base_in = (p * din + i) * post;
                for o in 0..dout {
                    let k = op[(o, i)];
                    if k == ZERO {
                        continue;
                    }
                    let base_out = (p * dout + o) * post;
                    for q in 0..post {
                        dst[base_out + q] += k * src[base_in + q];
                    }
                }
            }
        }
    }
    out
}

fn permute_vector(v: &CVector, map: &[usize]) -> CVector {
    CVector::from_iterator(map.len(), map.iter().map(|&i| v[i]))
}

fn permute_matrix(m: &CMatrix, map: &[usize]) -> CMatrix {
    let n = map.len();
    CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])])
}

/// Kronecker product on concatenated factor lists.
pub trait TensorProduct: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

pub fn tensor<T: TensorProduct>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

// ---------------------------------------------------------------------------
// StateVector

/// Pure state (ket) on a tensor space.
#[derive(Clone, Debug)]
pub struct StateVector {
    space: TensorSpace,
    amps: CVector,
    subnormalized: bool,
}

impl StateVector {
    /// Normalized state; the norm must be 1 to within `NORM_TOL`.
    pub fn new(space: TensorSpace, amps: CVector) -> Result<Self> {
        let s = Self::new_subnormalized(space, amps)?;
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self {
            subnormalized: false,
            ..s
        })
    }

    /// Vector whose norm may be at most 1.
    pub fn new_subnormalized(space: TensorSpace, amps: CVector) -> Result<Self> {
        if amps.len() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                got: amps.len(),
            });
        }
        let norm = amps.norm();
        if norm > 1.0 + NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} exceeds 1")));
        }
        Ok(Self {
            space,
            amps,
            subnormalized: true,
        })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized_from(space: TensorSpace, amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        Self::new(space, amps / real(norm))
    }

    pub(crate) fn from_parts(space: TensorSpace, amps: CVector) -> Self {
        debug_assert_eq!(space.total_dim(), amps.len());
        Self {
            space,
            amps,
            subnormalized: false,
        }
    }

    pub fn basis(space: TensorSpace, index: usize) -> Result<Self> {
        let d = space.total_dim();
        if index >= d {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {d}"
            )));
        }
        let mut amps = CVector::zeros(d);
        amps[index] = ONE;
        Ok(Self::from_parts(space, amps))
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// Returns the normalized vector (for subnormalized inputs).
    pub fn normalized(&self) -> Result<Self> {
        Self::normalized_from(self.space.clone(), self.amps.clone())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.space.require_same(&other.space)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn projector(&self) -> DensityOperator {
        DensityOperator {
            space: self.space.clone(),
            matrix: &self.amps * self.amps.adjoint(),
            subnormalized: self.subnormalized,
        }
    }

    /// Reorders factors to the given label order (all labels must be listed).
    pub fn permuted(&self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.space.len() {
            return Err(Error::SpaceMismatch(format!(
                "permutation must list every factor of {}",
                self.space
            )));
        }
        let order = self.space.positions(labels)?;
        let map = permutation_map(&self.space.dims(), &order);
        Ok(Self {
            space: self.space.permuted(&order),
            amps: permute_vector(&self.amps, &map),
            subnormalized: self.subnormalized,
        })
    }

    /// Reshapes into a matrix with rows indexed by `left` (in the given
    /// order) and columns by the remaining factors in their current order.
    pub fn as_matrix(&self, left: &[&str]) -> Result<(CMatrix, TensorSpace, TensorSpace)> {
        let order = self.space.order_with_front(left)?;
        let left_space = self.space.select(left)?;
        let right_space = self.space.without(left)?;
        let map = permutation_map(&self.space.dims(), &order);
        let rows = left_space.total_dim();
        let cols = right_space.total_dim();
        let m = CMatrix::from_fn(rows, cols, |i, j| self.amps[map[i * cols + j]]);
        Ok((m, left_space, right_space))
    }

    /// Rebuilds a state from a matrix with rows over `left` and columns over `right`.
    pub fn from_matrix(m: &CMatrix, left: TensorSpace, right: TensorSpace) -> Result<Self> {
        if m.nrows() != left.total_dim() || m.ncols() != right.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: left.total_dim() * right.total_dim(),
                got: m.nrows() * m.ncols(),
            });
        }
        let space = left.concat(&right)?;
        let cols = m.ncols();
        let amps = CVector::from_fn(m.len(), |k, _| m[(k / cols, k % cols)]);
        Self::new_subnormalized(space, amps).map(|mut s| {
            s.subnormalized = (s.norm() - 1.0).abs() > NORM_TOL;
            s
        })
    }

    /// Reduced density operator on `keep` (in the given order).
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityOperator> {
        let (m, left, _) = self.as_matrix(keep)?;
        Ok(DensityOperator::from_parts(left, &m * m.adjoint(), self.subnormalized))
    }

    /// Partial trace of the projector over `discard`.
    pub fn partial_trace(&self, discard: &[&str]) -> Result<DensityOperator> {
        let keep_space = self.space.without(discard)?;
        let keep: Vec<&str> = keep_space.labels();
        self.reduced(&keep)
    }

    /// Applies an operator to one factor, replacing it with the operator's
    /// output space.
    pub fn apply_local(&self, label: &str, op: &LinearOp) -> Result<Self> {
        let pos = self.space.position(label)?;
        if op.in_space.total_dim() != self.space.factors[pos].dim {
            return Err(Error::DimensionMismatch {
                expected: self.space.factors[pos].dim,
                got: op.in_space.total_dim(),
            });
        }
        let mut factors = self.space.factors[..pos].to_vec();
        factors.extend(op.out_space.factors.iter().cloned());
        factors.extend(self.space.factors[pos + 1..].iter().cloned());
        let space = TensorSpace::from_factors(factors)?;
        let data = CMatrix::from_column_slice(self.amps.len(), 1, self.amps.as_slice());
        let out = apply_rows(&data, &self.space.dims(), pos, &op.matrix);
        let amps = out.column(0).clone_owned();
        let subnormalized = self.subnormalized || !op.isometry;
        Ok(Self {
            space,
            amps,
            subnormalized,
        })
    }

    /// Merges the listed factors into one factor named `new_label`.
    pub fn merge_factors(&self, labels: &[&str], new_label: &str) -> Result<Self> {
        let (order, slot) = self.space.merge_order(labels)?;
        let map = permutation_map(&self.space.dims(), &order);
        let permuted = self.space.permuted(&order);
        let merged_dim: usize = labels.iter().map(|l| self.space.dim_of(l)).product::<Result<usize>>()?;
        let mut factors: Vec<Factor> = Vec::new();
        let mut i = 0;
        while i < permuted.factors.len() {
            if i == slot {
                factors.push(Factor::new(new_label, merged_dim));
                i += labels.len();
            } else {
                factors.push(permuted.factors[i].clone());
                i += 1;
            }
        }
        Ok(Self {
            space: TensorSpace::from_factors(factors)?,
            amps: permute_vector(&self.amps, &map),
            subnormalized: self.subnormalized,
        })
    }

    /// Splits one factor into consecutive factors of the given dimensions.
    pub fn split_factor(&self, label: &str, parts: &[(&str, usize)]) -> Result<Self> {
        let space = split_space(&self.space, label, parts)?;
        Ok(Self {
            space,
            amps: self.amps.clone(),
            subnormalized: self.subnormalized,
        })
    }

    pub fn relabeled(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            space: self.space.relabeled(from, to)?,
            ..self.clone()
        })
    }
}

fn split_space(space: &TensorSpace, label: &str, parts: &[(&str, usize)]) -> Result<TensorSpace> {
    let pos = space.position(label)?;
    let prod: usize = parts.iter().map(|p| p.1).product();
    if prod != space.factors[pos].dim {
        return Err(Error::DimensionMismatch {
            expected: space.factors[pos].dim,
            got: prod,
        });
    }
    let mut factors = space.factors[..pos].to_vec();
    factors.extend(parts.iter().map(|&(l, d)| Factor::new(l, d)));
    factors.extend(space.factors[pos + 1..].iter().cloned());
    TensorSpace::from_factors(factors)
}

impl TensorProduct for StateVector {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let space = self.space.concat(&other.space)?;
        let amps = self.amps.kronecker(&other.amps);
        Ok(Self {
            space,
            amps,
            subnormalized: self.subnormalized || other.subnormalized,
        })
    }
}

// ---------------------------------------------------------------------------
// DensityOperator

/// Mixed state on a tensor space.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    space: TensorSpace,
    matrix: CMatrix,
    subnormalized: bool,
}

impl DensityOperator {
    /// Validated density operator: Hermitian, unit trace and positive
    /// semidefinite, all to the global tolerance.
    pub fn new(space: TensorSpace, matrix: CMatrix) -> Result<Self> {
        Self::validated(space, matrix, false)
    }

    /// Like [`DensityOperator::new`] but admits trace ≤ 1.
    pub fn new_subnormalized(space: TensorSpace, matrix: CMatrix) -> Result<Self> {
        Self::validated(space, matrix, true)
    }

    fn validated(space: TensorSpace, matrix: CMatrix, subnormalized: bool) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows(),
            });
        }
        let herm = hermiticity_defect(&matrix);
        if herm > TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = matrix.trace().re;
        if subnormalized {
            if tr > 1.0 + TOL {
                return Err(Error::InvalidState(format!("trace {tr} exceeds 1")));
            }
        } else if (tr - 1.0).abs() > TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let eigs = hermitian_eigenvalues(&matrix);
        if let Some(neg) = linalg::negative_beyond_clamp(&eigs) {
            return Err(Error::InvalidState(format!("negative eigenvalue {neg:e}")));
        }
        Ok(Self {
            space,
            matrix: linalg::hermitize(&matrix),
            subnormalized,
        })
    }

    /// Built by an operation that preserves validity; only Hermitized.
    pub(crate) fn from_parts(space: TensorSpace, matrix: CMatrix, subnormalized: bool) -> Self {
        debug_assert_eq!(space.total_dim(), matrix.nrows());
        Self {
            space,
            matrix: linalg::hermitize(&matrix),
            subnormalized,
        }
    }

    pub fn maximally_mixed(space: TensorSpace) -> Self {
        let d = space.total_dim();
        Self {
            matrix: CMatrix::identity(d, d) * real(1.0 / d as f64),
            space,
            subnormalized: false,
        }
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        psi.projector()
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Eigenvalues, nonincreasing.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Eigenvalues (nonincreasing) and eigenvectors with the canonical phase convention.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        hermitian_eigen(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        crate::metrics::purity(&self.matrix)
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        crate::metrics::von_neumann_entropy(self)
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > tol).count()
    }

    pub fn permuted(&self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.space.len() {
            return Err(Error::SpaceMismatch(format!(
                "permutation must list every factor of {}",
                self.space
            )));
        }
        let order = self.space.positions(labels)?;
        let map = permutation_map(&self.space.dims(), &order);
        Ok(Self {
            space: self.space.permuted(&order),
            matrix: permute_matrix(&self.matrix, &map),
            subnormalized: self.subnormalized,
        })
    }

    /// Traces out the factors in `discard`; the result keeps the remaining
    /// factors in their current order.
    pub fn partial_trace(&self, discard: &[&str]) -> Result<Self> {
        let disc_pos = self.space.positions(discard)?;
        let keep_pos = self.space.complement_positions(&disc_pos);
        let mut order = keep_pos.clone();
        order.extend(disc_pos.iter().copied());
        let map = permutation_map(&self.space.dims(), &order);
        let keep_space = TensorSpace {
            factors: keep_pos.iter().map(|&p| self.space.factors[p].clone()).collect(),
        };
        let k = keep_space.total_dim();
        let dd: usize = disc_pos.iter().map(|&p| self.space.factors[p].dim).product();
        let mut out = CMatrix::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                let mut acc = ZERO;
                for e in 0..dd {
                    acc += self.matrix[(map[a * dd + e], map[b * dd + e])];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(Self::from_parts(keep_space, out, self.subnormalized))
    }

    /// Reduced state on `keep`, in the given label order.
    pub fn reduced(&self, keep: &[&str]) -> Result<Self> {
        let discard_space = self.space.without(keep)?;
        let discard = discard_space.labels();
        self.partial_trace(&discard)?.permuted(keep)
    }

    /// `K ρ K†` with `K` acting on one factor, which is replaced by the
    /// operator's output factors.
    pub fn conjugate_local(&self, label: &str, op: &LinearOp) -> Result<Self> {
        let pos = self.space.position(label)?;
        if op.in_space.total_dim() != self.space.factors[pos].dim {
            return Err(Error::DimensionMismatch {
                expected: self.space.factors[pos].dim,
                got: op.in_space.total_dim(),
            });
        }
        let mut factors = self.space.factors[..pos].to_vec();
        factors.extend(op.out_space.factors.iter().cloned());
        factors.extend(self.space.factors[pos + 1..].iter().cloned());
        let space = TensorSpace::from_factors(factors)?;
        let matrix = conjugate_on_factor(&self.matrix, &self.space.dims(), pos, &op.matrix);
        Ok(Self::from_parts(space, matrix, self.subnormalized))
    }

    /// Applies a channel to one factor, which becomes `out_label` with the
    /// channel's output dimension.
    pub fn apply_channel(&self, label: &str, channel: &crate::channel::Channel, out_label: &str) -> Result<Self> {
        let pos = self.space.position(label)?;
        if channel.in_dim() != self.space.factors[pos].dim {
            return Err(Error::DimensionMismatch {
                expected: self.space.factors[pos].dim,
                got: channel.in_dim(),
            });
        }
        let mut factors = self.space.factors.clone();
        factors[pos] = Factor::new(out_label, channel.out_dim());
        let space = TensorSpace::from_factors(factors)?;
        let dims = self.space.dims();
        let mut out = CMatrix::zeros(space.total_dim(), space.total_dim());
        for k in channel.kraus() {
            out += conjugate_on_factor(&self.matrix, &dims, pos, k);
        }
        Ok(Self::from_parts(space, out, self.subnormalized))
    }

    pub fn merge_factors(&self, labels: &[&str], new_label: &str) -> Result<Self> {
        let (order, slot) = self.space.merge_order(labels)?;
        let map = permutation_map(&self.space.dims(), &order);
        let permuted = self.space.permuted(&order);
        let merged_dim = self.space.dim_of_all(labels)?;
        let mut factors: Vec<Factor> = Vec::new();
        let mut i = 0;
        while i < permuted.factors.len() {
            if i == slot {
                factors.push(Factor::new(new_label, merged_dim));
                i += labels.len();
            } else {
                factors.push(permuted.factors[i].clone());
                i += 1;
            }
        }
        Ok(Self {
            space: TensorSpace::from_factors(factors)?,
            matrix: permute_matrix(&self.matrix, &map),
            subnormalized: self.subnormalized,
        })
    }

    pub fn split_factor(&self, label: &str, parts: &[(&str, usize)]) -> Result<Self> {
        Ok(Self {
            space: split_space(&self.space, label, parts)?,
            ..self.clone()
        })
    }

    pub fn relabeled(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            space: self.space.relabeled(from, to)?,
            ..self.clone()
        })
    }

    /// Canonical purification: `Σ_k √λ_k |k⟩ ⊗ |k⟩_P` over the eigenvectors with
    /// eigenvalue above `1e-12`, with the purifying factor appended under `label`.
    pub fn purify_with_label(&self, label: &str) -> Result<StateVector> {
        let (vals, vecs) = self.eigen();
        let kept: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 1e-12).collect();
        let rank = kept.len().max(1);
        let space = self.space.concat(&TensorSpace::single(label, rank)?)?;
        let d = self.dim();
        let mut amps = CVector::zeros(d * rank);
        for (slot, &k) in kept.iter().enumerate() {
            let w = vals[k].sqrt();
            for i in 0..d {
                amps[i * rank + slot] += vecs[(i, k)] * w;
            }
        }
        StateVector::new_subnormalized(space, amps).map(|mut s| {
            s.subnormalized = self.subnormalized;
            s
        })
    }

    /// Purification with the purifying factor labeled `purifier`.
    pub fn purify(&self) -> Result<StateVector> {
        self.purify_with_label("purifier")
    }
}

/// `(I ⊗ K ⊗ I) ρ (I ⊗ K ⊗ I)†` for `K` acting on factor `pos`.
pub(crate) fn conjugate_on_factor(m: &CMatrix, dims: &[usize], pos: usize, k: &CMatrix) -> CMatrix {
    let left = apply_rows(m, dims, pos, k);
    let right = apply_rows(&left.adjoint(), dims, pos, k);
    right.adjoint()
}

impl TensorProduct for DensityOperator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            space: self.space.concat(&other.space)?,
            matrix: kron(&self.matrix, &other.matrix),
            subnormalized: self.subnormalized || other.subnormalized,
        })
    }
}

// ---------------------------------------------------------------------------
// LinearOp

/// Linear map between two tensor spaces.
#[derive(Clone, Debug)]
pub struct LinearOp {
    in_space: TensorSpace,
    out_space: TensorSpace,
    matrix: CMatrix,
    isometry: bool,
}

impl LinearOp {
    pub fn new(in_space: TensorSpace, out_space: TensorSpace, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != out_space.total_dim() || matrix.ncols() != in_space.total_dim() {
            return Err(Error::InvalidOperator(format!(
                "matrix is {}x{} but spaces need {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                out_space.total_dim(),
                in_space.total_dim()
            )));
        }
        let isometry = matrix.nrows() >= matrix.ncols() && isometry_defect(&matrix) <= TOL;
        Ok(Self {
            in_space,
            out_space,
            matrix,
            isometry,
        })
    }

    /// Checked isometry: `V†V = I` to the global tolerance.
    pub fn isometry(in_space: TensorSpace, out_space: TensorSpace, matrix: CMatrix) -> Result<Self> {
        let op = Self::new(in_space, out_space, matrix)?;
        if !op.isometry {
            return Err(Error::InvalidOperator(format!(
                "not an isometry (defect {:e})",
                isometry_defect(&op.matrix)
            )));
        }
        Ok(op)
    }

    pub fn unitary(space: TensorSpace, matrix: CMatrix) -> Result<Self> {
        Self::isometry(space.clone(), space, matrix)
    }

    pub fn identity(space: TensorSpace) -> Self {
        let d = space.total_dim();
        Self {
            in_space: space.clone(),
            out_space: space,
            matrix: CMatrix::identity(d, d),
            isometry: true,
        }
    }

    /// Operator that permutes the factors of `space` into `labels` order.
    pub fn permutation(space: &TensorSpace, labels: &[&str]) -> Result<Self> {
        let order = space.positions(labels)?;
        if order.len() != space.len() {
            return Err(Error::SpaceMismatch("permutation must list every factor".into()));
        }
        let map = permutation_map(&space.dims(), &order);
        let d = space.total_dim();
        let mut m = CMatrix::zeros(d, d);
        for (new, &old) in map.iter().enumerate() {
            m[(new, old)] = ONE;
        }
        Ok(Self {
            in_space: space.clone(),
            out_space: space.permuted(&order),
            matrix: m,
            isometry: true,
        })
    }

    /// Swap operator `F` on two copies of a `d`-dimensional space:
    /// `F |x⟩|y⟩ = |y⟩|x⟩`.
    pub fn swap(d: usize) -> CMatrix {
        let mut f = CMatrix::zeros(d * d, d * d);
        for x in 0..d {
            for y in 0..d {
                f[(y * d + x, x * d + y)] = ONE;
            }
        }
        f
    }

    pub(crate) fn from_parts(in_space: TensorSpace, out_space: TensorSpace, matrix: CMatrix, isometry: bool) -> Self {
        Self {
            in_space,
            out_space,
            matrix,
            isometry,
        }
    }

    pub fn in_space(&self) -> &TensorSpace {
        &self.in_space
    }

    pub fn out_space(&self) -> &TensorSpace {
        &self.out_space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_isometry(&self) -> bool {
        self.isometry
    }

    pub fn is_unitary(&self) -> bool {
        self.isometry && self.matrix.nrows() == self.matrix.ncols()
    }

    pub fn adjoint(&self) -> Self {
        let m = self.matrix.adjoint();
        let isometry = self.is_unitary();
        Self {
            in_space: self.out_space.clone(),
            out_space: self.in_space.clone(),
            matrix: m,
            isometry,
        }
    }

    /// Transpose in the computational basis.
    pub fn transpose(&self) -> Self {
        Self {
            in_space: self.out_space.clone(),
            out_space: self.in_space.clone(),
            matrix: self.matrix.transpose(),
            isometry: self.is_unitary(),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearOp) -> Result<Self> {
        if self.in_space.total_dim() != inner.out_space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.in_space.total_dim(),
                got: inner.out_space.total_dim(),
            });
        }
        Ok(Self {
            in_space: inner.in_space.clone(),
            out_space: self.out_space.clone(),
            matrix: &self.matrix * &inner.matrix,
            isometry: self.isometry && inner.isometry,
        })
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.space().total_dim() != self.in_space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.in_space.total_dim(),
                got: psi.space().total_dim(),
            });
        }
        Ok(StateVector {
            space: self.out_space.clone(),
            amps: &self.matrix * psi.amplitudes(),
            subnormalized: psi.is_subnormalized() || !self.isometry,
        })
    }

    /// `V ρ V†`.
    pub fn conjugate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.in_space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.in_space.total_dim(),
                got: rho.dim(),
            });
        }
        Ok(DensityOperator::from_parts(
            self.out_space.clone(),
            &self.matrix * rho.matrix() * self.matrix.adjoint(),
            rho.is_subnormalized() || !self.isometry,
        ))
    }
}

impl TensorProduct for LinearOp {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            in_space: self.in_space.concat(&other.in_space)?,
            out_space: self.out_space.concat(&other.out_space)?,
            matrix: kron(&self.matrix, &other.matrix),
            isometry: self.isometry && other.isometry,
        })
    }
}

// ---------------------------------------------------------------------------
// Constructions

/// `|Φ⟩ = d^{-1/2} Σ_i |i⟩|i⟩` on factors `A` and `A'`.
pub fn maximally_entangled(d: usize) -> Result<StateVector> {
    maximally_entangled_on("A", "A'", d)
}

pub fn maximally_entangled_on(a: &str, b: &str, d: usize) -> Result<StateVector> {
    if d == 0 {
        return Err(Error::ZeroDimension(a.to_string()));
    }
    let space = TensorSpace::new([(a, d), (b, d)])?;
    let mut amps = CVector::zeros(d * d);
    let w = real(1.0 / (d as f64).sqrt());
    for i in 0..d {
        amps[i * d + i] = w;
    }
    Ok(StateVector::from_parts(space, amps))
}

/// Schmidt decomposition `|ψ⟩ = Σ_i s_i |l_i⟩|r_i⟩` across a bipartition.
#[derive(Clone, Debug)]
pub struct Schmidt {
    /// Nonincreasing, nonnegative.
    pub coefficients: Vec<f64>,
    /// Columns are the left Schmidt vectors.
    pub left: CMatrix,
    /// Columns are the right Schmidt vectors.
    pub right: CMatrix,
    pub left_space: TensorSpace,
    pub right_space: TensorSpace,
}

impl Schmidt {
    pub fn reconstruct(&self) -> Result<StateVector> {
        let k = self.coefficients.len();
        let diag = DVector::from_iterator(k, self.coefficients.iter().map(|&s| real(s)));
        let m = &self.left * CMatrix::from_diagonal(&diag) * self.right.transpose();
        StateVector::from_matrix(&m, self.left_space.clone(), self.right_space.clone())
    }
}

/// Schmidt decomposition of `psi` with `left` labels on one side of the cut.
pub fn schmidt(psi: &StateVector, left: &[&str]) -> Result<Schmidt> {
    if left.is_empty() || left.len() >= psi.space().len() {
        return Err(Error::InvalidParameter(
            "both sides of a Schmidt cut must contain at least one factor".into(),
        ));
    }
    let (m, left_space, right_space) = psi.as_matrix(left)?;
    let (u, s, v_t) = linalg::svd(&m);
    // M = Σ s_i u_i v_i^† so the right vector is the conjugate of v_i, i.e. row i of V†.
    let right = v_t.transpose();
    Ok(Schmidt {
        coefficients: s,
        left: u,
        right,
        left_space,
        right_space,
    })
}

/// Embeds `basis` columns (orthonormal vectors) as an isometry into `space`.
pub fn subspace_isometry(space: TensorSpace, sub_label: &str, basis: CMatrix) -> Result<LinearOp> {
    let sub = TensorSpace::single(sub_label, basis.ncols())?;
    LinearOp::isometry(sub, space, basis)
}

/// `|0⟩` style computational basis ket on a single labeled factor.
pub fn ket(label: &str, dim: usize, index: usize) -> Result<StateVector> {
    StateVector::basis(TensorSpace::single(label, dim)?, index)
}

pub(crate) fn complex_from_pair(p: [f64; 2]) -> C64 {
    c(p[0], p[1])
}
