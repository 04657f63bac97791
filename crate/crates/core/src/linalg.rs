//! Dense complex linear algebra for the small spaces used throughout the
//! crate (total dimension at most 16).
//!
//! All multipartite objects use one Kronecker convention: the leftmost party
//! is the slowest-varying index. Composite indices are decoded with
//! [`split_index`] and encoded with [`join_index`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_TOL: f64 = 1e-9;

/// Hermiticity tolerance accepted by [`HermitianOp::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A vector of complex amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ket {
    amps: Vec<C64>,
}

impl Ket {
    pub fn new(amps: Vec<C64>) -> Self {
        Ket { amps }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Ket {
            amps: values.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    /// Computational basis vector `|index>` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ket { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Ket {
        Ket {
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Fixes the global phase so the first amplitude with modulus above
    /// `1e-10 * norm` is real and positive.
    pub fn with_canonical_phase(&self) -> Ket {
        let cutoff = 1e-10 * self.norm();
        match self.amps.iter().find(|a| a.norm() > cutoff) {
            Some(lead) => {
                let phase = lead.conj() / lead.norm();
                self.scaled(phase)
            }
            None => self.clone(),
        }
    }

    /// Equality of the rays spanned by two kets: both are normalized and
    /// phase-fixed, then compared entrywise.
    pub fn projective_eq(&self, other: &Ket, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let (Ok(a), Ok(b)) = (self.normalized(), other.normalized()) else {
            return false;
        };
        let (a, b) = (a.with_canonical_phase(), b.with_canonical_phase());
        a.amps.iter().zip(&b.amps).all(|(x, y)| (x - y).norm() <= tol)
    }

    /// Maximum entrywise distance to another ket of equal dimension.
    pub fn max_abs_diff(&self, other: &Ket) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Ket {
        Ket {
            amps: self.amps.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn to_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amps)
    }

    pub fn from_dvector(v: &DVector<C64>) -> Ket {
        Ket {
            amps: v.iter().copied().collect(),
        }
    }
}

/// Kronecker product of two kets, left factor slowest.
pub fn kron(left: &Ket, right: &Ket) -> Ket {
    let mut amps = Vec::with_capacity(left.dim() * right.dim());
    for a in &left.amps {
        for b in &right.amps {
            amps.push(a * b);
        }
    }
    Ket { amps }
}

pub fn tensor_product(factors: &[Ket]) -> Result<Ket> {
    let (first, rest) = factors
        .split_first()
        .ok_or(Error::Empty("tensor product of no factors"))?;
    if factors.iter().any(|f| f.dim() == 0 || f.norm() == 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(rest.iter().fold(first.clone(), |acc, f| kron(&acc, f)))
}

/// Stacks `vectors` as rows of conjugated amplitudes, so that the matrix maps
/// `x` to the overlaps `<v_i|x>`. Pads with zero rows up to `dim` so nalgebra
/// returns a square right factor.
fn overlap_matrix(vectors: &[Ket], dim: usize) -> DMatrix<C64> {
    let rows = vectors.len().max(dim);
    let mut m = DMatrix::from_element(rows, dim, ZERO);
    for (i, v) in vectors.iter().enumerate() {
        for (j, a) in v.amps.iter().enumerate() {
            m[(i, j)] = a.conj();
        }
    }
    m
}

fn check_dims(vectors: &[Ket], dim: usize) -> Result<()> {
    match vectors.iter().find(|v| v.dim() != dim) {
        Some(v) => Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
        }),
        None => Ok(()),
    }
}

/// Singular values of the stacked vectors, sorted descending.
pub fn singular_values(vectors: &[Ket]) -> Result<Vec<f64>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let dim = first.dim();
    check_dims(vectors, dim)?;
    let mut values: Vec<f64> = overlap_matrix(vectors, dim)
        .singular_values()
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.truncate(vectors.len().min(dim));
    Ok(values)
}

/// Number of singular values above `tol` times the largest one.
pub fn span_dimension(vectors: &[Ket], tol: f64) -> Result<usize> {
    let values = singular_values(vectors)?;
    let Some(&largest) = values.first() else {
        return Ok(0);
    };
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(values.iter().filter(|&&s| s > tol * largest).count())
}

/// A unit vector orthogonal to every input, or `None` when the inputs span
/// the whole space. With a null space of dimension above one, the vector
/// belonging to the smallest singular value is returned, phase-fixed.
pub fn orthogonal_complement_sample(vectors: &[Ket], dim: usize, tol: f64) -> Result<Option<Ket>> {
    check_dims(vectors, dim)?;
    if dim == 0 {
        return Ok(None);
    }
    if vectors.iter().all(|v| v.norm() == 0.0) {
        return Ok(Some(Ket::basis(dim, 0)));
    }
    if span_dimension(vectors, tol)? >= dim {
        return Ok(None);
    }
    let svd = overlap_matrix(vectors, dim).svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smallest = (0..svd.singular_values.len())
        .min_by(|&a, &b| {
            svd.singular_values[a]
                .total_cmp(&svd.singular_values[b])
                .then(b.cmp(&a))
        })
        .expect("nonempty spectrum");
    let null = Ket::new(v_t.row(smallest).iter().map(|z| z.conj()).collect());
    Ok(Some(null.normalized()?.with_canonical_phase()))
}

/// A Hermitian operator stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOp {
    m: DMatrix<C64>,
}

impl HermitianOp {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let dev = hermitian_deviation(&m);
        let scale = max_abs(&m).max(1.0);
        if dev.is_nan() || dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(HermitianOp { m })
    }

    /// Builds from a matrix known to be Hermitian up to rounding and
    /// symmetrizes it exactly.
    pub(crate) fn symmetrized(m: DMatrix<C64>) -> Self {
        let h = (&m + m.adjoint()).scale(0.5);
        HermitianOp { m: h }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOp {
            m: DMatrix::identity(dim, dim),
        }
    }

    /// `|v><v|` for the given (not necessarily normalized) ket.
    pub fn projector(v: &Ket) -> Self {
        let col = v.to_dvector();
        HermitianOp {
            m: &col * col.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        HermitianOp {
            m: self.m.scale(factor),
        }
    }

    pub fn add(&self, other: &HermitianOp) -> Self {
        HermitianOp {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &HermitianOp) -> Self {
        HermitianOp {
            m: &self.m - &other.m,
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    pub fn max_abs_diff(&self, other: &HermitianOp) -> f64 {
        max_abs(&(&self.m - &other.m))
    }

    /// `<v|M|v>`, real part.
    pub fn expectation(&self, v: &Ket) -> f64 {
        let col = v.to_dvector();
        (col.adjoint() * &self.m * &col)[(0, 0)].re
    }

    pub fn apply(&self, v: &Ket) -> Ket {
        Ket::from_dvector(&(&self.m * v.to_dvector()))
    }

    /// Full transpose (equivalently, entrywise conjugate).
    pub fn transpose(&self) -> Self {
        HermitianOp {
            m: self.m.transpose(),
        }
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Ket>,
}

impl Eigensystem {
    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues with modulus above `tol` times the spectral radius.
    pub fn rank(&self, tol: f64) -> usize {
        let radius = self.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if radius == 0.0 {
            return 0;
        }
        self.values.iter().filter(|v| v.abs() > tol * radius).count()
    }
}

pub fn hermitian_eigensystem(op: &HermitianOp) -> Result<Eigensystem> {
    let dev = hermitian_deviation(&op.m);
    if dev.is_nan() || dev > HERMITIAN_TOL * op.max_abs().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let eig = SymmetricEigen::new(op.m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| Ket::from_dvector(&eig.eigenvectors.column(i).into_owned()))
        .collect();
    Ok(Eigensystem { values, vectors })
}

/// Decodes a composite index into per-party digits (leftmost slowest).
pub fn split_index(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &d) in digits.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

pub fn join_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

fn check_layout(op: &HermitianOp, dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != op.dim() {
        return Err(Error::InvalidLayout(format!(
            "layout {dims:?} does not match operator dimension {}",
            op.dim()
        )));
    }
    Ok(())
}

fn check_party_subset(parties: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &p in parties {
        if p >= n || seen[p] {
            return Err(Error::InvalidPartition(format!(
                "party subset {parties:?} invalid for {n} parties"
            )));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Transposes the tensor factors listed in `block`.
pub fn partial_transpose(op: &HermitianOp, dims: &[usize], block: &[usize]) -> Result<HermitianOp> {
    check_layout(op, dims)?;
    check_party_subset(block, dims.len())?;
    let n = op.dim();
    let mut out = DMatrix::from_element(n, n, ZERO);
    for row in 0..n {
        let rd = split_index(row, dims);
        for col in 0..n {
            let mut r = rd.clone();
            let mut c = split_index(col, dims);
            for &p in block {
                std::mem::swap(&mut r[p], &mut c[p]);
            }
            out[(join_index(&r, dims), join_index(&c, dims))] = op.m[(row, col)];
        }
    }
    Ok(HermitianOp { m: out })
}

/// Traces out every party not listed in `keep`; the kept parties stay in
/// ascending order.
pub fn partial_trace(op: &HermitianOp, dims: &[usize], keep: &[usize]) -> Result<HermitianOp> {
    check_layout(op, dims)?;
    check_party_subset(keep, dims.len())?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let kept_dims: Vec<usize> = keep.iter().map(|&p| dims[p]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let mut out = DMatrix::from_element(out_dim, out_dim, ZERO);
    let n = op.dim();
    for row in 0..n {
        let rd = split_index(row, dims);
        for col in 0..n {
            let cd = split_index(col, dims);
            let traced_match = (0..dims.len())
                .filter(|p| !keep.contains(p))
                .all(|p| rd[p] == cd[p]);
            if !traced_match {
                continue;
            }
            let r: Vec<usize> = keep.iter().map(|&p| rd[p]).collect();
            let c: Vec<usize> = keep.iter().map(|&p| cd[p]).collect();
            out[(join_index(&r, &kept_dims), join_index(&c, &kept_dims))] += op.m[(row, col)];
        }
    }
    Ok(HermitianOp { m: out })
}

/// Reorders tensor factors: party `i` of the result is party `order[i]` of
/// the input.
pub fn permute_operator(op: &HermitianOp, dims: &[usize], order: &[usize]) -> Result<HermitianOp> {
    check_layout(op, dims)?;
    if order.len() != dims.len() {
        return Err(Error::InvalidPermutation(order.to_vec()));
    }
    check_party_subset(order, dims.len()).map_err(|_| Error::InvalidPermutation(order.to_vec()))?;
    let new_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
    let n = op.dim();
    let map: Vec<usize> = (0..n)
        .map(|old| {
            let d = split_index(old, dims);
            let nd: Vec<usize> = order.iter().map(|&p| d[p]).collect();
            join_index(&nd, &new_dims)
        })
        .collect();
    let mut out = DMatrix::from_element(n, n, ZERO);
    for row in 0..n {
        for col in 0..n {
            out[(map[row], map[col])] = op.m[(row, col)];
        }
    }
    Ok(HermitianOp { m: out })
}

/// Same reordering as [`permute_operator`], applied to a ket.
pub fn permute_ket(v: &Ket, dims: &[usize], order: &[usize]) -> Result<Ket> {
    let total: usize = dims.iter().product();
    if total != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: v.dim(),
        });
    }
    if order.len() != dims.len() {
        return Err(Error::InvalidPermutation(order.to_vec()));
    }
    check_party_subset(order, dims.len()).map_err(|_| Error::InvalidPermutation(order.to_vec()))?;
    let new_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
    let mut amps = vec![ZERO; total];
    for (old, a) in v.amps.iter().enumerate() {
        let d = split_index(old, dims);
        let nd: Vec<usize> = order.iter().map(|&p| d[p]).collect();
        amps[join_index(&nd, &new_dims)] = *a;
    }
    Ok(Ket::new(amps))
}

/// The operator on party `free` obtained by sandwiching `rho` between the
/// fixed states of every other party:
/// `<w|result|w> = <fixed ⊗ w| rho |fixed ⊗ w>`.
pub fn reduced_contraction(
    rho: &HermitianOp,
    dims: &[usize],
    fixed: &[Option<Ket>],
    free: usize,
) -> Result<HermitianOp> {
    check_layout(rho, dims)?;
    if fixed.len() != dims.len() || free >= dims.len() {
        return Err(Error::InvalidArgument(format!(
            "fixed states for {} parties, free party {free}, layout has {}",
            fixed.len(),
            dims.len()
        )));
    }
    let d_free = dims[free];
    let mut columns = Vec::with_capacity(d_free);
    for k in 0..d_free {
        let mut factors = Vec::with_capacity(dims.len());
        for (p, slot) in fixed.iter().enumerate() {
            if p == free {
                factors.push(Ket::basis(d_free, k));
                continue;
            }
            let ket = slot.as_ref().ok_or_else(|| {
                Error::InvalidArgument(format!("no fixed state for party {p}"))
            })?;
            if ket.dim() != dims[p] {
                return Err(Error::DimensionMismatch {
                    expected: dims[p],
                    found: ket.dim(),
                });
            }
            factors.push(ket.clone());
        }
        columns.push(
            factors[1..]
                .iter()
                .fold(factors[0].clone(), |acc, f| kron(&acc, f))
                .to_dvector(),
        );
    }
    let b = DMatrix::from_columns(&columns);
    Ok(HermitianOp::symmetrized(b.adjoint() * &rho.m * b))
}

/// Maximum deviation of `u` from unitarity, `max |U U^† - I|`.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let id = DMatrix::<C64>::identity(u.nrows(), u.ncols());
    max_abs(&(u * u.adjoint() - id))
}

pub fn apply_matrix(u: &DMatrix<C64>, v: &Ket) -> Ket {
    Ket::from_dvector(&(u * v.to_dvector()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> Ket {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ket::from_real(&[s, 0.0, 0.0, s])
    }

    fn random_hermitian(dim: usize, seed: u64) -> HermitianOp {
        // small LCG keeps this module free of RNG plumbing
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::from_fn(dim, dim, |_, _| C64::new(next(), next()));
        HermitianOp::symmetrized(&a + a.adjoint())
    }

    #[test]
    fn tensor_product_orders_leftmost_slowest() {
        let zero = Ket::basis(2, 0);
        let one = Ket::basis(2, 1);
        let v = tensor_product(&[zero.clone(), zero.clone()]).unwrap();
        assert_eq!(v, Ket::from_real(&[1.0, 0.0, 0.0, 0.0]));
        let v = tensor_product(&[one, zero]).unwrap();
        assert_eq!(v, Ket::from_real(&[0.0, 0.0, 1.0, 0.0]));
    }

    #[test]
    fn tensor_product_of_pi_over_four_states_is_uniform() {
        let t = std::f64::consts::FRAC_PI_4;
        let a = Ket::from_real(&[t.cos(), t.sin()]);
        let v = tensor_product(&[a.clone(), a]).unwrap();
        for amp in v.amplitudes() {
            assert!((amp - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_product_rejects_empty_and_zero() {
        assert!(matches!(tensor_product(&[]), Err(Error::Empty(_))));
        let z = Ket::from_real(&[0.0, 0.0]);
        assert!(tensor_product(&[z]).is_err());
    }

    #[test]
    fn span_dimension_basics() {
        let e0 = Ket::basis(2, 0);
        let e1 = Ket::basis(2, 1);
        assert_eq!(span_dimension(&[e0.clone(), e1], RANK_TOL).unwrap(), 2);
        let twice = Ket::from_real(&[2.0, 0.0]);
        assert_eq!(span_dimension(&[e0.clone(), twice], RANK_TOL).unwrap(), 1);
        assert_eq!(span_dimension(&[], RANK_TOL).unwrap(), 0);
        let bad = Ket::basis(3, 0);
        assert!(span_dimension(&[e0, bad], RANK_TOL).is_err());
    }

    #[test]
    fn complement_of_single_vector() {
        let v = orthogonal_complement_sample(&[Ket::basis(2, 0)], 2, RANK_TOL)
            .unwrap()
            .unwrap();
        assert!(v.projective_eq(&Ket::basis(2, 1), 1e-12));
    }

    #[test]
    fn complement_of_full_basis_is_none() {
        let basis: Vec<Ket> = (0..4).map(|i| Ket::basis(4, i)).collect();
        assert!(orthogonal_complement_sample(&basis, 4, RANK_TOL)
            .unwrap()
            .is_none());
    }

    #[test]
    fn complement_of_nothing_is_first_basis_vector() {
        let v = orthogonal_complement_sample(&[], 3, RANK_TOL).unwrap().unwrap();
        assert_eq!(v, Ket::basis(3, 0));
    }

    #[test]
    fn eigensystem_of_identity_and_projector() {
        let e = hermitian_eigensystem(&HermitianOp::identity(4)).unwrap();
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let p = HermitianOp::projector(&Ket::basis(4, 0));
        let e = hermitian_eigensystem(&p).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!(e.values[1..].iter().all(|v| v.abs() < 1e-14));
        assert!(e.vectors[0].projective_eq(&Ket::basis(4, 0), 1e-12));
    }

    #[test]
    fn eigensystem_rejects_non_hermitian() {
        let mut m = DMatrix::from_element(2, 2, ZERO);
        m[(0, 1)] = c(1.0);
        assert!(matches!(HermitianOp::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigensystem_residuals_and_reconstruction() {
        for seed in 0..5 {
            let h = random_hermitian(16, seed);
            let e = hermitian_eigensystem(&h).unwrap();
            let norm = h.max_abs();
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            let mut recon = DMatrix::from_element(16, 16, ZERO);
            for (val, vec) in e.values.iter().zip(&e.vectors) {
                let r = h.apply(vec).max_abs_diff(&vec.scaled(c(*val)));
                assert!(r <= 1e-9 * norm.max(1.0));
                let col = vec.to_dvector();
                recon += (&col * col.adjoint()).scale(*val);
            }
            assert!(max_abs(&(recon - h.matrix())) <= 1e-9 * norm);
        }
    }

    #[test]
    fn partial_transpose_of_bell_state() {
        let rho = HermitianOp::projector(&bell());
        let pt = partial_transpose(&rho, &[2, 2], &[1]).unwrap();
        let e = hermitian_eigensystem(&pt).unwrap();
        assert!((e.min_value() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_of_maximally_mixed_is_identity() {
        let rho = HermitianOp::identity(16).scale(1.0 / 16.0);
        for block in [vec![0], vec![1, 2], vec![0, 1, 3]] {
            let pt = partial_transpose(&rho, &[2, 2, 2, 2], &block).unwrap();
            assert!(pt.max_abs_diff(&rho) < 1e-16);
        }
    }

    #[test]
    fn partial_transpose_is_an_involution_and_composes_to_full_transpose() {
        let dims = [2, 2, 2, 2];
        for seed in 0..10 {
            let h = random_hermitian(16, seed);
            let block = [0, 2];
            let once = partial_transpose(&h, &dims, &block).unwrap();
            let twice = partial_transpose(&once, &dims, &block).unwrap();
            assert!(twice.max_abs_diff(&h) <= 1e-13);
            assert!((once.trace() - h.trace()).abs() < 1e-12);
            let full = partial_transpose(&once, &dims, &[1, 3]).unwrap();
            assert!(full.max_abs_diff(&h.transpose()) <= 1e-13);
        }
    }

    #[test]
    fn partial_transpose_rejects_bad_block() {
        let rho = HermitianOp::identity(4);
        assert!(partial_transpose(&rho, &[2, 2], &[2]).is_err());
        assert!(partial_transpose(&rho, &[2, 2], &[0, 0]).is_err());
        assert!(partial_transpose(&rho, &[2, 3], &[0]).is_err());
    }

    #[test]
    fn contraction_of_maximally_mixed_state() {
        let rho = HermitianOp::identity(16).scale(1.0 / 16.0);
        let t = 0.37f64;
        let a = Ket::from_real(&[t.cos(), t.sin()]);
        let fixed = vec![Some(a.clone()), None, Some(a.clone()), Some(a)];
        let r = reduced_contraction(&rho, &[2, 2, 2, 2], &fixed, 1).unwrap();
        assert!(r.max_abs_diff(&HermitianOp::identity(2).scale(1.0 / 16.0)) < 1e-15);
    }

    #[test]
    fn contraction_of_bell_state() {
        let rho = HermitianOp::projector(&bell());
        let fixed = vec![Some(Ket::basis(2, 0)), None];
        let r = reduced_contraction(&rho, &[2, 2], &fixed, 1).unwrap();
        let expected = HermitianOp::projector(&Ket::basis(2, 0)).scale(0.5);
        assert!(r.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn contraction_requires_all_fixed_parties() {
        let rho = HermitianOp::identity(4);
        assert!(reduced_contraction(&rho, &[2, 2], &[None, None], 1).is_err());
    }

    #[test]
    fn partial_trace_and_permutation() {
        let v = tensor_product(&[Ket::basis(2, 0), bell()]).unwrap();
        let rho = HermitianOp::projector(&v);
        let ra = partial_trace(&rho, &[2, 2, 2], &[0]).unwrap();
        assert!(ra.max_abs_diff(&HermitianOp::projector(&Ket::basis(2, 0))) < 1e-15);
        let rbc = partial_trace(&rho, &[2, 2, 2], &[1, 2]).unwrap();
        assert!(rbc.max_abs_diff(&HermitianOp::projector(&bell())) < 1e-15);

        let w = tensor_product(&[Ket::basis(2, 1), Ket::basis(3, 2)]).unwrap();
        let swapped = permute_ket(&w, &[2, 3], &[1, 0]).unwrap();
        let expected = tensor_product(&[Ket::basis(3, 2), Ket::basis(2, 1)]).unwrap();
        assert_eq!(swapped, expected);
        let op = permute_operator(&HermitianOp::projector(&w), &[2, 3], &[1, 0]).unwrap();
        assert!(op.max_abs_diff(&HermitianOp::projector(&expected)) < 1e-15);
    }

    #[test]
    fn projective_equality_ignores_phase_and_scale() {
        let v = Ket::new(vec![C64::new(0.0, 1.0), C64::new(1.0, 0.0)]);
        let w = v.scaled(C64::new(-2.0, 0.5));
        assert!(v.projective_eq(&w, 1e-12));
        assert!(!v.projective_eq(&Ket::basis(2, 0), 1e-12));
    }
}
