//! Dense complex linear-algebra helpers shared by the rest of the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::EIGEN_CLAMP;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `(X + X†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * real(0.5)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in nonincreasing order together with the matching
/// eigenvector columns. Each eigenvector is rotated so that its first
/// component of modulus above `1e-12` is real and positive.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = symmetric_eigen(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).clone_owned();
        canonical_phase(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Hermitian eigenvalues only, nonincreasing.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut vals: Vec<f64> = symmetric_eigen(hermitize(m)).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

// The QR sweep occasionally breaks down on matrices with exact block
// structure and returns non-finite values; a fixed reflection destroys that
// structure without changing the spectrum.
fn symmetric_eigen(h: CMatrix) -> SymmetricEigen<C64, nalgebra::Dyn> {
    let eig = SymmetricEigen::new(h.clone());
    if eig.eigenvalues.iter().all(|x| x.is_finite()) {
        return eig;
    }
    let n = h.nrows();
    let v = CVector::from_iterator(n, (0..n).map(|k| c(1.0 + ((k as f64) * 0.618_033_988_7).fract(), 0.5 - ((k as f64) * 0.414_213_562_4).fract())));
    let q = identity(n) - (&v * v.adjoint()) * real(2.0 / v.norm_squared());
    let mut inner = SymmetricEigen::new(hermitize(&(&q * &h * &q)));
    inner.eigenvectors = &q * inner.eigenvectors;
    inner
}

pub(crate) fn canonical_phase(v: &mut CVector) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = z.conj() / z.norm();
        *v *= phase;
    }
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// `[-EIGEN_CLAMP, 0)` are treated as zero; anything more negative is
/// clamped too but reported through the returned minimum eigenvalue.
pub fn psd_sqrt(m: &CMatrix) -> (CMatrix, f64) {
    let (vals, vecs) = hermitian_eigen(m);
    let min = vals.last().copied().unwrap_or(0.0);
    // eigenvalues at rounding level would otherwise contribute ~1e-8 after the root
    let floor = 1e-14 * vals.first().copied().unwrap_or(0.0).max(1.0);
    let roots = DVector::from_iterator(vals.len(), vals.iter().map(|&l| real(if l > floor { l.sqrt() } else { 0.0 })));
    let scaled = &vecs * CMatrix::from_diagonal(&roots);
    (scaled * vecs.adjoint(), min)
}

/// Singular values, nonincreasing.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Thin SVD `m = U diag(s) V†` with singular values sorted nonincreasing.
pub fn svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut u_sorted = CMatrix::zeros(u.nrows(), k);
    let mut v_t_sorted = CMatrix::zeros(k, v_t.ncols());
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_t_sorted.set_row(dst, &v_t.row(src));
        s.push(svd.singular_values[src]);
    }
    (u_sorted, s, v_t_sorted)
}

/// Extend orthonormal columns to an orthonormal set of `target` columns via
/// Gram-Schmidt against the standard basis.
pub fn orthonormal_completion(cols: &CMatrix, target: usize) -> CMatrix {
    let dim = cols.nrows();
    assert!(target <= dim, "cannot complete beyond the ambient dimension");
    let mut out = CMatrix::zeros(dim, target);
    let mut filled = 0;
    for j in 0..cols.ncols().min(target) {
        out.set_column(j, &cols.column(j));
        filled += 1;
    }
    let mut candidate = 0;
    while filled < target && candidate < dim {
        let mut v = CVector::zeros(dim);
        v[candidate] = ONE;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for k in 0..filled {
                let col = out.column(k);
                let proj = col.dotc(&v);
                v -= col * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            out.set_column(filled, &(v / real(norm)));
            filled += 1;
        }
        candidate += 1;
    }
    out
}

/// `max |(V†V − I)_ij|`.
pub fn isometry_defect(v: &CMatrix) -> f64 {
    let gram = v.adjoint() * v;
    max_abs(&(gram - identity(v.ncols())))
}

/// For a tensor space with factor dimensions `dims`, returns the map from
/// each flat index of the permuted space (factors reordered as `order`) to
/// the flat index in the original space. Row-major: last factor fastest.
pub fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut counter = vec![0usize; n];
    for _ in 0..total {
        let old: usize = counter
            .iter()
            .zip(order)
            .map(|(&digit, &k)| digit * strides[k])
            .sum();
        map.push(old);
        for pos in (0..n).rev() {
            counter[pos] += 1;
            if counter[pos] < new_dims[pos] {
                break;
            }
            counter[pos] = 0;
        }
    }
    map
}

/// Entropy in bits of a spectrum; negative entries above `-EIGEN_CLAMP` are
/// clamped to zero.
pub fn spectrum_entropy(eigs: &[f64]) -> f64 {
    eigs.iter()
        .map(|&l| if l < 0.0 { 0.0 } else { l })
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum()
}

/// Returns the most negative eigenvalue if it lies below the clamp threshold.
pub(crate) fn negative_beyond_clamp(eigs: &[f64]) -> Option<f64> {
    eigs.iter()
        .copied()
        .filter(|&l| l < -EIGEN_CLAMP)
        .reduce(f64::min)
}
