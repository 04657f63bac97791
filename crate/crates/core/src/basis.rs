//! Orthogonal product sets over an arbitrary party layout, and the exact
//! unextendibility decision.
//!
//! A product vector `w = w_1 ⊗ ... ⊗ w_n` is orthogonal to a member
//! `v = v_1 ⊗ ... ⊗ v_n` iff `<v_i|w_i> = 0` for at least one party `i`. So a
//! set is extendible iff its members can be distributed among the parties
//! such that, for every party, the components assigned to it leave a nonzero
//! orthogonal complement. [`check_unextendible`] enumerates those
//! assignments depth-first.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    apply_matrix, orthogonal_complement_sample, tensor_product, unitarity_deviation, Ket, C64,
    RANK_TOL,
};

/// Default tolerance for orthogonality decisions.
pub const ORTHO_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyLayout {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl PartyLayout {
    pub fn new(dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidLayout(format!(
                "need at least two parties, got {}",
                dims.len()
            )));
        }
        if dims.len() != labels.len() {
            return Err(Error::InvalidLayout(format!(
                "{} dims but {} labels",
                dims.len(),
                labels.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidLayout("zero-dimensional party".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || labels[..i].contains(l) {
                return Err(Error::InvalidLayout(format!("bad or duplicate label {l:?}")));
            }
        }
        Ok(PartyLayout { dims, labels })
    }

    /// Layout with labels `A`, `B`, `C`, ... .
    pub fn with_default_labels(dims: Vec<usize>) -> Result<Self> {
        let labels = default_labels(dims.len());
        Self::new(dims, labels)
    }

    pub fn qubits(n: usize) -> Self {
        Self::with_default_labels(vec![2; n]).expect("n >= 2 qubits")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

pub fn default_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| char::from(b'A' + (i % 26) as u8).to_string())
        .collect()
}

/// A product vector stored as its normalized local components.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductVector {
    components: Vec<Ket>,
}

impl ProductVector {
    /// Normalizes every component; a zero component is rejected.
    pub fn new(components: Vec<Ket>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty("product vector without components"));
        }
        let components = components
            .iter()
            .map(Ket::normalized)
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductVector { components })
    }

    pub fn components(&self) -> &[Ket] {
        &self.components
    }

    pub fn component(&self, party: usize) -> &Ket {
        &self.components[party]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.components.iter().map(Ket::dim).collect()
    }

    /// The full tensor, leftmost party slowest.
    pub fn full(&self) -> Ket {
        tensor_product(&self.components).expect("components are nonzero")
    }

    /// `<self|other>` computed factor by factor.
    pub fn inner(&self, other: &ProductVector) -> C64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.inner(b))
            .product()
    }

    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        self.components.iter().map(ket_to_pairs).collect()
    }
}

pub(crate) fn ket_to_pairs(k: &Ket) -> Vec<[f64; 2]> {
    k.amplitudes().iter().map(|z| [z.re, z.im]).collect()
}

pub(crate) fn ket_from_pairs(pairs: &[[f64; 2]]) -> Ket {
    Ket::new(pairs.iter().map(|p| C64::new(p[0], p[1])).collect())
}

impl Serialize for ProductVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

/// An ordered set of product vectors over a common layout.
///
/// Construction validates shapes only; orthogonality is certified by
/// [`check_pairwise_orthogonality`] or enforced by [`ProductBasis::orthogonal`].
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBasis {
    layout: PartyLayout,
    members: Vec<ProductVector>,
}

impl ProductBasis {
    pub fn new(layout: PartyLayout, members: Vec<ProductVector>) -> Result<Self> {
        for m in &members {
            if m.components.len() != layout.parties() {
                return Err(Error::InvalidLayout(format!(
                    "member has {} components, layout has {} parties",
                    m.components.len(),
                    layout.parties()
                )));
            }
            for (k, &d) in m.components.iter().zip(layout.dims()) {
                if k.dim() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: k.dim(),
                    });
                }
            }
        }
        if members.len() > layout.total_dim() {
            return Err(Error::InvalidLayout(format!(
                "{} members exceed total dimension {}",
                members.len(),
                layout.total_dim()
            )));
        }
        Ok(ProductBasis { layout, members })
    }

    /// Like [`ProductBasis::new`], additionally requiring pairwise
    /// orthogonality within [`ORTHO_TOL`].
    pub fn orthogonal(layout: PartyLayout, members: Vec<ProductVector>) -> Result<Self> {
        let basis = Self::new(layout, members)?;
        let report = check_pairwise_orthogonality(&basis, ORTHO_TOL);
        if let Some((i, j)) = report.worst_pair.filter(|_| !report.orthogonal) {
            return Err(Error::NotOrthogonal(i, j, report.max_overlap));
        }
        Ok(basis)
    }

    pub fn layout(&self) -> &PartyLayout {
        &self.layout
    }

    pub fn members(&self) -> &[ProductVector] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn full_vectors(&self) -> Vec<Ket> {
        self.members.iter().map(ProductVector::full).collect()
    }

    /// Largest `|<v|w>|` between the witness and any member.
    pub fn max_overlap_with(&self, w: &ProductVector) -> f64 {
        self.members
            .iter()
            .map(|m| m.inner(w).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProductBasisDoc::from(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProductBasisDoc = serde_json::from_str(text)?;
        doc.into_basis()
    }
}

/// Wire format: `{ "layout": [..], "labels": [..], "vectors": [[[[re,im],..] per party] per member] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductBasisDoc {
    pub layout: Vec<usize>,
    #[serde(default)]
    pub labels: Vec<String>,
    pub vectors: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<&ProductBasis> for ProductBasisDoc {
    fn from(b: &ProductBasis) -> Self {
        ProductBasisDoc {
            layout: b.layout.dims.clone(),
            labels: b.layout.labels.clone(),
            vectors: b.members.iter().map(ProductVector::to_pairs).collect(),
        }
    }
}

impl ProductBasisDoc {
    /// Normalizes every component and checks orthogonality.
    pub fn into_basis(self) -> Result<ProductBasis> {
        let labels = if self.labels.is_empty() {
            default_labels(self.layout.len())
        } else {
            self.labels
        };
        let layout = PartyLayout::new(self.layout, labels)?;
        let members = self
            .vectors
            .iter()
            .map(|parts| ProductVector::new(parts.iter().map(|p| ket_from_pairs(p)).collect()))
            .collect::<Result<Vec<_>>>()?;
        ProductBasis::orthogonal(layout, members)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    pub orthogonal: bool,
    pub max_overlap: f64,
    pub worst_pair: Option<(usize, usize)>,
}

pub fn check_pairwise_orthogonality(basis: &ProductBasis, tol: f64) -> OrthogonalityReport {
    let mut max_overlap = 0.0;
    let mut worst_pair = None;
    for (i, a) in basis.members.iter().enumerate() {
        for (j, b) in basis.members.iter().enumerate().skip(i + 1) {
            let o = a.inner(b).norm();
            if worst_pair.is_none() || o > max_overlap {
                max_overlap = o;
                worst_pair = Some((i, j));
            }
        }
    }
    OrthogonalityReport {
        orthogonal: max_overlap <= tol,
        max_overlap,
        worst_pair,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtendibilityVerdict {
    pub unextendible: bool,
    /// A product vector orthogonal to every member, present iff extendible.
    pub witness: Option<ProductVector>,
    /// Party chosen for each member in the assignment that produced the witness.
    pub assignment: Option<Vec<usize>>,
}

/// Orthonormal basis of the span of the components assigned to one party,
/// grown incrementally during the search.
struct PartySpan {
    dim: usize,
    basis: Vec<Ket>,
}

impl PartySpan {
    /// Adds `v`; returns whether the span grew.
    fn push(&mut self, v: &Ket) -> bool {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &self.basis {
                let c = b.inner(&r);
                r = Ket::new(
                    r.amplitudes()
                        .iter()
                        .zip(b.amplitudes())
                        .map(|(x, y)| x - c * y)
                        .collect(),
                );
            }
        }
        let n = r.norm();
        if n > RANK_TOL * v.norm() {
            self.basis.push(r.scaled(C64::new(1.0 / n, 0.0)));
            true
        } else {
            false
        }
    }

    fn saturated(&self) -> bool {
        self.basis.len() >= self.dim
    }
}

struct AssignmentSearch<'a> {
    basis: &'a ProductBasis,
    spans: Vec<PartySpan>,
    assignment: Vec<usize>,
    tol: f64,
}

impl AssignmentSearch<'_> {
    fn run(&mut self, k: usize) -> Option<ProductVector> {
        if k == self.basis.len() {
            return self.witness();
        }
        for party in 0..self.basis.layout.parties() {
            let grew = self.spans[party].push(self.basis.members[k].component(party));
            if !self.spans[party].saturated() {
                self.assignment.push(party);
                if let Some(w) = self.run(k + 1) {
                    return Some(w);
                }
                self.assignment.pop();
            }
            if grew {
                self.spans[party].basis.pop();
            }
        }
        None
    }

    fn witness(&self) -> Option<ProductVector> {
        let layout = &self.basis.layout;
        let mut comps = Vec::with_capacity(layout.parties());
        for (party, &d) in layout.dims().iter().enumerate() {
            let assigned: Vec<Ket> = self
                .assignment
                .iter()
                .enumerate()
                .filter(|(_, &p)| p == party)
                .map(|(m, _)| self.basis.members[m].component(party).clone())
                .collect();
            comps.push(orthogonal_complement_sample(&assigned, d, RANK_TOL).ok()??);
        }
        let w = ProductVector::new(comps).ok()?;
        (self.basis.max_overlap_with(&w) <= self.tol).then_some(w)
    }
}

/// Decides whether any product vector is orthogonal to every member.
///
/// Members are assigned to parties in listed order, parties tried in layout
/// order, so the witness comes from the lexicographically first feasible
/// assignment.
pub fn check_unextendible(basis: &ProductBasis, tol: f64) -> ExtendibilityVerdict {
    let mut search = AssignmentSearch {
        basis,
        spans: basis
            .layout
            .dims()
            .iter()
            .map(|&dim| PartySpan {
                dim,
                basis: Vec::new(),
            })
            .collect(),
        assignment: Vec::with_capacity(basis.len()),
        tol,
    };
    match search.run(0) {
        Some(w) => ExtendibilityVerdict {
            unextendible: false,
            witness: Some(w),
            assignment: Some(search.assignment),
        },
        None => ExtendibilityVerdict {
            unextendible: true,
            witness: None,
            assignment: None,
        },
    }
}

/// Outcome of the size bound for `C^d ⊗ C^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ShortcutVerdict {
    pub size: usize,
    /// `2d`; every orthogonal product set smaller than this is extendible.
    pub bound: usize,
}

/// In `C^d ⊗ C^2` an orthogonal product set of size below `2d` is never
/// unextendible. Returns that verdict when it applies, `None` otherwise.
pub fn small_system_shortcut(basis: &ProductBasis) -> Option<ShortcutVerdict> {
    let dims = basis.layout.dims();
    if dims.len() != 2 {
        return None;
    }
    let other = match (dims[0], dims[1]) {
        (2, d) | (d, 2) => d,
        _ => return None,
    };
    let bound = 2 * other;
    (basis.len() < bound).then_some(ShortcutVerdict {
        size: basis.len(),
        bound,
    })
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Reorders parties: party `i` of the result is party `sigma[i]` of the input.
pub fn permute_parties(basis: &ProductBasis, sigma: &[usize]) -> Result<ProductBasis> {
    let layout = &basis.layout;
    check_permutation(sigma, layout.parties())?;
    let new_layout = PartyLayout::new(
        sigma.iter().map(|&p| layout.dims[p]).collect(),
        sigma.iter().map(|&p| layout.labels[p].clone()).collect(),
    )?;
    let members = basis
        .members
        .iter()
        .map(|m| ProductVector {
            components: sigma.iter().map(|&p| m.components[p].clone()).collect(),
        })
        .collect();
    ProductBasis::new(new_layout, members)
}

/// Applies `U_1 ⊗ ... ⊗ U_n` to every member.
pub fn apply_local_unitaries(basis: &ProductBasis, unitaries: &[DMatrix<C64>]) -> Result<ProductBasis> {
    let layout = &basis.layout;
    if unitaries.len() != layout.parties() {
        return Err(Error::InvalidArgument(format!(
            "{} unitaries for {} parties",
            unitaries.len(),
            layout.parties()
        )));
    }
    for (u, &d) in unitaries.iter().zip(layout.dims()) {
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: u.nrows(),
            });
        }
        let dev = unitarity_deviation(u);
        if dev > 1e-12 {
            return Err(Error::NotUnitary(dev));
        }
    }
    let members = basis
        .members
        .iter()
        .map(|m| {
            ProductVector::new(
                m.components
                    .iter()
                    .zip(unitaries)
                    .map(|(k, u)| apply_matrix(u, k))
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    ProductBasis::new(layout.clone(), members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn q(v: [f64; 2]) -> Ket {
        Ket::from_real(&v)
    }

    fn pv(parts: &[[f64; 2]]) -> ProductVector {
        ProductVector::new(parts.iter().map(|p| q(*p)).collect()).unwrap()
    }

    #[test]
    fn orthogonality_report() {
        let layout = PartyLayout::qubits(2);
        let b = ProductBasis::new(
            layout.clone(),
            vec![pv(&[[1., 0.], [1., 0.]]), pv(&[[1., 0.], [0., 1.]])],
        )
        .unwrap();
        assert!(check_pairwise_orthogonality(&b, ORTHO_TOL).orthogonal);

        let a = [FRAC_PI_4.cos(), FRAC_PI_4.sin()];
        let b = ProductBasis::new(layout, vec![pv(&[[1., 0.], [1., 0.]]), pv(&[[1., 0.], a])])
            .unwrap();
        let r = check_pairwise_orthogonality(&b, ORTHO_TOL);
        assert!(!r.orthogonal);
        assert!((r.max_overlap - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(r.worst_pair, Some((0, 1)));
    }

    #[test]
    fn single_vector_is_extendible() {
        let b = ProductBasis::new(PartyLayout::qubits(2), vec![pv(&[[0.6, 0.8], [1., 0.]])])
            .unwrap();
        let v = check_unextendible(&b, ORTHO_TOL);
        assert!(!v.unextendible);
        let w = v.witness.unwrap();
        assert!(b.max_overlap_with(&w) <= 1e-10);
        assert_eq!(v.assignment, Some(vec![0]));
    }

    #[test]
    fn full_basis_is_unextendible() {
        let e = [[1., 0.], [0., 1.]];
        let members = (0..4).map(|i| pv(&[e[i / 2], e[i % 2]])).collect();
        let b = ProductBasis::orthogonal(PartyLayout::qubits(2), members).unwrap();
        let v = check_unextendible(&b, ORTHO_TOL);
        assert!(v.unextendible);
        assert!(v.witness.is_none() && v.assignment.is_none());
    }

    #[test]
    fn shortcut_bounds() {
        let e = [[1., 0.], [0., 1.]];
        let members: Vec<_> = (0..4).map(|i| pv(&[e[i / 2], e[i % 2]])).collect();
        let b = ProductBasis::new(PartyLayout::qubits(2), members.clone()).unwrap();
        assert_eq!(small_system_shortcut(&b), None);
        let b = ProductBasis::new(PartyLayout::qubits(2), members[..3].to_vec()).unwrap();
        assert_eq!(small_system_shortcut(&b), Some(ShortcutVerdict { size: 3, bound: 4 }));
        let b = ProductBasis::new(PartyLayout::qubits(3), vec![]).unwrap();
        assert_eq!(small_system_shortcut(&b), None);
    }

    #[test]
    fn zero_component_rejected() {
        assert!(matches!(
            ProductVector::new(vec![q([0., 0.]), q([1., 0.])]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn layout_validation() {
        assert!(PartyLayout::with_default_labels(vec![2]).is_err());
        assert!(PartyLayout::new(vec![2, 2], vec!["A".into(), "A".into()]).is_err());
        assert!(PartyLayout::new(vec![2, 0], vec!["A".into(), "B".into()]).is_err());
    }

    #[test]
    fn invalid_permutations_and_unitaries() {
        let b = ProductBasis::new(PartyLayout::qubits(2), vec![pv(&[[1., 0.], [1., 0.]])]).unwrap();
        assert!(permute_parties(&b, &[0, 0]).is_err());
        assert!(permute_parties(&b, &[0]).is_err());
        let not_unitary = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        let id = DMatrix::identity(2, 2);
        assert!(matches!(
            apply_local_unitaries(&b, &[id, not_unitary]),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn json_round_trip_normalizes() {
        let doc = r#"{"layout":[2,2],"labels":["A","B"],
            "vectors":[[[[2,0],[0,0]],[[1,0],[0,0]]],[[[0,0],[3,0]],[[0,0],[0,1]]]]}"#;
        let b = ProductBasis::from_json(doc).unwrap();
        assert!((b.members()[0].component(0).norm() - 1.0).abs() < 1e-15);
        let again = ProductBasis::from_json(&b.to_json()).unwrap();
        assert_eq!(again, b);
    }

    #[test]
    fn json_rejects_non_orthogonal() {
        let doc = r#"{"layout":[2,2],"vectors":[[[[1,0],[0,0]],[[1,0],[0,0]]],[[[1,0],[1,0]],[[1,0],[0,0]]]]}"#;
        assert!(matches!(
            ProductBasis::from_json(doc),
            Err(Error::NotOrthogonal(0, 1, _))
        ));
    }
}
