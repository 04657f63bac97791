//! States supported on the complement of a UPB: construction, PPT tests,
//! reduced ranks and the range-criterion entanglement certificate.
//!
//! The four-qubit family built from the 11th size-9 UPB also has two closed
//! forms, through the coefficient matrix `u` and the states `ψ_i`; both are
//! cross-checked against the complement construction.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{check_pairwise_orthogonality, check_unextendible, PartyLayout, ProductBasis, ORTHO_TOL};
use crate::catalog::size9_column_lettered;
use crate::coarse::{coarse_grain, CoarsePartition};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, partial_trace, partial_transpose, HermitianOp, Ket, C64, RANK_TOL};
use crate::uom::{instantiate, AngleAssignment, Symbol, SymbolicUom};

pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// `x_1 … x_8`, triple products of sines and cosines of the four angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XCoefficients(pub [f64; 8]);

impl XCoefficients {
    /// `x_i` with the 1-based index used in the sign table.
    pub fn x(&self, i: usize) -> f64 {
        self.0[i - 1]
    }
}

pub fn x_coefficients(angles: &AngleAssignment) -> Result<XCoefficients> {
    angles.validate()?;
    let (sa, ca) = angles.alpha.sin_cos();
    let (sb, cb) = angles.beta.sin_cos();
    let (sg, cg) = angles.gamma.sin_cos();
    let (sd, cd) = angles.delta.sin_cos();
    Ok(XCoefficients([
        sb * sg * sd,
        ca * cg * sd,
        ca * sb * cd,
        ca * cb * sg,
        cb * cg * cd,
        sa * sg * cd,
        sa * cb * sd,
        sa * sb * cg,
    ]))
}

/// Entry `(i, j)` of `u` is `sign * x_k` for `SIGNED_INDEX[i][j] = ±k`.
const SIGNED_INDEX: [[i8; 8]; 8] = [
    [1, 2, 3, 4, -5, -6, -7, -8],
    [2, -1, -4, 3, 6, -5, -8, 7],
    [3, 4, -1, -2, 7, 8, -5, -6],
    [4, -3, 2, -1, 8, -7, 6, -5],
    [-5, -6, -7, -8, -1, -2, -3, -4],
    [-6, 5, -8, 7, 2, -1, 4, -3],
    [7, -8, -5, 6, -3, 4, 1, -2],
    [8, 7, -6, -5, -4, -3, 2, 1],
];

pub const UNITARITY_TOL: f64 = 1e-10;

/// The real orthogonal 8×8 matrix `u`. Fails if `u uᵀ` misses the identity
/// by more than [`UNITARITY_TOL`].
pub fn coefficient_matrix(angles: &AngleAssignment) -> Result<DMatrix<f64>> {
    let x = x_coefficients(angles)?;
    let u = DMatrix::from_fn(8, 8, |i, j| {
        let k = SIGNED_INDEX[i][j];
        k.signum() as f64 * x.x(k.unsigned_abs() as usize)
    });
    let dev = orthogonality_deviation(&u);
    if dev > UNITARITY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    Ok(u)
}

pub fn orthogonality_deviation(u: &DMatrix<f64>) -> f64 {
    let g = u * u.transpose() - DMatrix::<f64>::identity(u.nrows(), u.nrows());
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Product terms of the first expansion, paired with the column of `u`
/// (0-based) that weights them.
const PSI_TERMS: [(&str, usize); 8] = [
    ("a' 0 0 0", 0),
    ("a' 1 1 1", 4),
    ("1 b' 1 0", 1),
    ("0 b' 0 1", 5),
    ("1 0 c' 1", 2),
    ("0 1 c' 0", 6),
    ("1 1 0 d'", 3),
    ("0 0 1 d'", 7),
];

fn product_ket(row: &[Symbol], angles: &AngleAssignment) -> Ket {
    row.iter()
        .skip(1)
        .fold(row[0].ket(angles), |acc, s| crate::linalg::kron(&acc, &s.ket(angles)))
}

fn term_kets(angles: &AngleAssignment) -> Vec<Ket> {
    let terms = SymbolicUom::parse(&PSI_TERMS.map(|t| t.0).join(" / ")).expect("fixed terms parse");
    terms.rows().iter().map(|r| product_ket(r, angles)).collect()
}

/// `ψ_i` as a sum of the eight product terms.
fn psi_product_form(u: &DMatrix<f64>, terms: &[Ket], i: usize) -> Ket {
    let mut amps = vec![C64::new(0.0, 0.0); 16];
    for ((_, col), t) in PSI_TERMS.iter().zip(terms) {
        for (a, b) in amps.iter_mut().zip(t.amplitudes()) {
            *a += b * u[(i, *col)];
        }
    }
    Ket::new(amps)
}

/// `ψ_i` amplitude by amplitude in the `|j,k> = |4j+k>` grouping of
/// `AB ⊗ CD`.
fn psi_amplitude_form(u: &DMatrix<f64>, angles: &AngleAssignment, i: usize) -> Ket {
    let (sa, ca) = angles.alpha.sin_cos();
    let (sb, cb) = angles.beta.sin_cos();
    let (sg, cg) = angles.gamma.sin_cos();
    let (sd, cd) = angles.delta.sin_cos();
    let w = |j: usize| u[(i, j - 1)];
    let grid = [
        [w(1) * sa, w(6) * sb, w(8) * sd, -w(8) * cd],
        [w(7) * sg, -w(6) * cb, -w(7) * cg, w(5) * sa],
        [-w(1) * ca, w(3) * sg, w(2) * sb, -w(3) * cg],
        [w(4) * sd, -w(4) * cd, -w(2) * cb, -w(5) * ca],
    ];
    Ket::from_real(&grid.concat())
}

pub const PSI_TOL: f64 = 1e-12;

/// The eight states `ψ_1 … ψ_8`; `ψ_1 = |a',b',c',d'>` and the rest span the
/// support of the rank-7 state.
#[derive(Clone, Debug)]
pub struct PsiStates {
    pub states: Vec<Ket>,
    /// Largest amplitude difference between the two expansions.
    pub form_discrepancy: f64,
}

pub fn psi_states(angles: &AngleAssignment) -> Result<PsiStates> {
    let u = coefficient_matrix(angles)?;
    let terms = term_kets(angles);
    let mut states = Vec::with_capacity(8);
    let mut worst = 0.0f64;
    for i in 0..8 {
        let a = psi_product_form(&u, &terms, i);
        let b = psi_amplitude_form(&u, angles, i);
        worst = worst.max(a.max_abs_diff(&b));
        states.push(a);
    }
    if worst > PSI_TOL {
        return Err(Error::Consistency(format!(
            "the two expansions of psi differ by {worst:.3e}"
        )));
    }
    Ok(PsiStates {
        states,
        form_discrepancy: worst,
    })
}

/// A unit-trace positive semidefinite operator on a party layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOp,
    layout: PartyLayout,
    source: String,
}

impl DensityMatrix {
    /// Validates dimension, trace within [`TRACE_TOL`] and minimum
    /// eigenvalue at least `-PSD_TOL`.
    pub fn new(op: HermitianOp, layout: PartyLayout, source: impl Into<String>) -> Result<Self> {
        if op.dim() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                found: op.dim(),
            });
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eigensystem(&op)?.min_value();
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(DensityMatrix {
            op,
            layout,
            source: source.into(),
        })
    }

    pub fn pure(v: &Ket, layout: PartyLayout, source: impl Into<String>) -> Result<Self> {
        Self::new(HermitianOp::projector(&v.normalized()?), layout, source)
    }

    pub fn maximally_mixed(layout: PartyLayout) -> Self {
        let d = layout.total_dim();
        DensityMatrix {
            op: HermitianOp::identity(d).scale(1.0 / d as f64),
            layout,
            source: "maximally mixed".into(),
        }
    }

    pub fn op(&self) -> &HermitianOp {
        &self.op
    }

    pub fn layout(&self) -> &PartyLayout {
        &self.layout
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigensystem(&self.op)?.values)
    }

    pub fn rank(&self, tol: f64) -> Result<usize> {
        Ok(hermitian_eigensystem(&self.op)?.rank(tol))
    }

    pub fn to_doc(&self) -> DensityDoc {
        let d = self.op.dim();
        DensityDoc {
            dim: d,
            layout: self.layout.dims().to_vec(),
            labels: self.layout.labels().to_vec(),
            entries: (0..d * d)
                .map(|k| {
                    let z = self.op.entry(k / d, k % d);
                    [z.re, z.im]
                })
                .collect(),
            source: self.source.clone(),
        }
    }

    pub fn from_doc(doc: DensityDoc) -> Result<Self> {
        let d = doc.dim;
        if doc.entries.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: doc.entries.len(),
            });
        }
        let layout = if doc.labels.is_empty() {
            PartyLayout::with_default_labels(doc.layout)?
        } else {
            PartyLayout::new(doc.layout, doc.labels)?
        };
        let m = DMatrix::from_fn(d, d, |i, j| {
            let [re, im] = doc.entries[i * d + j];
            C64::new(re, im)
        });
        Self::new(HermitianOp::new(m)?, layout, doc.source)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Wire format: row-major `[re, im]` entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityDoc {
    pub dim: usize,
    pub layout: Vec<usize>,
    #[serde(default)]
    pub labels: Vec<String>,
    pub entries: Vec<[f64; 2]>,
    #[serde(default)]
    pub source: String,
}

/// `(I - Σ|v><v|) / (D - s)` for an orthogonal product set of size `s`
/// in total dimension `D`.
pub fn build_rho(upb: &ProductBasis) -> Result<DensityMatrix> {
    let d = upb.layout().total_dim();
    let s = upb.len();
    if s >= d {
        return Err(Error::InvalidArgument(format!(
            "set of size {s} leaves no complement in dimension {d}"
        )));
    }
    let report = check_pairwise_orthogonality(upb, ORTHO_TOL);
    if !report.orthogonal {
        let (i, j) = report.worst_pair.expect("two members");
        return Err(Error::NotOrthogonal(i, j, report.max_overlap));
    }
    let mut op = HermitianOp::identity(d);
    for v in upb.full_vectors() {
        op = op.sub(&HermitianOp::projector(&v));
    }
    DensityMatrix::new(
        op.scale(1.0 / (d - s) as f64),
        upb.layout().clone(),
        format!("complement of a {s}-member product set"),
    )
}

/// Residual `max_v |rho v|` over the members of the generating set.
pub fn complement_residual(rho: &DensityMatrix, upb: &ProductBasis) -> f64 {
    upb.full_vectors()
        .iter()
        .map(|v| rho.op().apply(v).norm())
        .fold(0.0, f64::max)
}

/// The three closed forms of the rank-7 four-qubit state.
#[derive(Clone, Debug)]
pub struct RhoForms {
    /// `(I - Σ_{UPB} P) / 7`.
    pub complement: HermitianOp,
    /// `(Σ_{terms} P - P_{a'b'c'd'}) / 7`.
    pub term_sum: HermitianOp,
    /// `Σ_{i≥2} |ψ_i><ψ_i| / 7`.
    pub psi_sum: HermitianOp,
}

impl RhoForms {
    pub fn max_discrepancy(&self) -> f64 {
        self.complement
            .max_abs_diff(&self.term_sum)
            .max(self.complement.max_abs_diff(&self.psi_sum))
    }
}

pub fn rho_forms(angles: &AngleAssignment) -> Result<RhoForms> {
    let upb = instantiate(&size9_column_lettered(), angles)?;
    let complement = build_rho(&upb)?.op;
    let mut term_sum = HermitianOp::projector(&product_ket(
        &[
            Symbol::letter('a', true).unwrap(),
            Symbol::letter('b', true).unwrap(),
            Symbol::letter('c', true).unwrap(),
            Symbol::letter('d', true).unwrap(),
        ],
        angles,
    ))
    .scale(-1.0);
    for t in term_kets(angles) {
        term_sum = term_sum.add(&HermitianOp::projector(&t));
    }
    let psi = psi_states(angles)?;
    let mut psi_sum = HermitianOp::identity(16).scale(0.0);
    for v in &psi.states[1..] {
        psi_sum = psi_sum.add(&HermitianOp::projector(v));
    }
    Ok(RhoForms {
        complement,
        term_sum: term_sum.scale(1.0 / 7.0),
        psi_sum: psi_sum.scale(1.0 / 7.0),
    })
}

pub const FORMS_TOL: f64 = 1e-10;

/// The rank-7 four-qubit PPT state at the given angles. Fails if its three
/// closed forms disagree by more than [`FORMS_TOL`].
pub fn rho_family(angles: &AngleAssignment) -> Result<DensityMatrix> {
    let forms = rho_forms(angles)?;
    let gap = forms.max_discrepancy();
    if gap > FORMS_TOL {
        return Err(Error::Consistency(format!("closed forms differ by {gap:.3e}")));
    }
    let a = angles.as_array();
    DensityMatrix::new(
        forms.complement,
        PartyLayout::qubits(4),
        format!(
            "size9-11th complement, angles ({}, {}, {}, {})",
            a[0], a[1], a[2], a[3]
        ),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct PptReport {
    pub partition: String,
    pub ppt: bool,
    pub min_eigenvalue: f64,
    /// Parties transposed in the worst case.
    pub transposed: String,
    /// Descending spectrum of the worst partial transpose.
    pub spectrum: Vec<f64>,
}

/// PPT across a partition: every partial transpose over a union of blocks
/// (up to complement) has minimum eigenvalue at least `-tol`.
pub fn is_ppt(rho: &DensityMatrix, partition: &CoarsePartition, tol: f64) -> Result<PptReport> {
    let layout = rho.layout();
    if partition.parties() != layout.parties() {
        return Err(Error::InvalidPartition(format!(
            "partition over {} parties, state has {}",
            partition.parties(),
            layout.parties()
        )));
    }
    let k = partition.block_count();
    let mut worst: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    // Subsets containing the last block are complements of ones that don't.
    for mask in 1u32..(1 << (k - 1)) {
        let parties: Vec<usize> = (0..k - 1)
            .filter(|b| mask & (1 << b) != 0)
            .flat_map(|b| partition.blocks()[b].iter().copied())
            .collect();
        let pt = partial_transpose(rho.op(), layout.dims(), &parties)?;
        let values = hermitian_eigensystem(&pt)?.values;
        let min = *values.last().expect("nonempty");
        if worst.as_ref().is_none_or(|w| min < w.0) {
            worst = Some((min, parties, values));
        }
    }
    let (min, parties, spectrum) = worst.expect("at least two blocks");
    let labels = layout.labels();
    Ok(PptReport {
        partition: partition.label_string(labels),
        ppt: min >= -tol,
        min_eigenvalue: min,
        transposed: parties.iter().map(|&p| labels[p].as_str()).collect(),
        spectrum,
    })
}

/// All two-block partitions of the layout's parties; 7 for four parties.
pub fn bipartitions(parties: usize) -> Result<Vec<CoarsePartition>> {
    if parties < 2 {
        return Err(Error::InvalidLayout("need at least two parties".into()));
    }
    let mut out = Vec::new();
    // The last party always sits in the second block.
    for mask in 1u32..(1 << (parties - 1)) {
        let first: Vec<usize> = (0..parties).filter(|p| mask & (1 << p) != 0).collect();
        let second: Vec<usize> = (0..parties).filter(|p| mask & (1 << p) == 0).collect();
        out.push(CoarsePartition::new(parties, vec![first, second])?);
    }
    out.sort_by_key(|p| (p.blocks()[0].len().min(p.blocks()[1].len()), p.blocks().to_vec()));
    Ok(out)
}

/// Range criterion: the complement state of `upb` is entangled across
/// `partition` whenever the coarse-grained set is still unextendible.
pub fn certify_entangled_range(upb: &ProductBasis, partition: &CoarsePartition) -> Result<bool> {
    Ok(check_unextendible(&coarse_grain(upb, partition)?, ORTHO_TOL).unextendible)
}

/// Ranks of the reductions onto every single party and every pair of
/// parties, keyed by block label (`"A"`, `"AB"`, …).
pub fn reduced_ranks(rho: &DensityMatrix) -> Result<BTreeMap<String, usize>> {
    let layout = rho.layout();
    let n = layout.parties();
    let mut blocks: Vec<Vec<usize>> = (0..n).map(|p| vec![p]).collect();
    for p in 0..n {
        for q in p + 1..n {
            blocks.push(vec![p, q]);
        }
    }
    let mut out = BTreeMap::new();
    for keep in blocks {
        if keep.len() == n {
            continue;
        }
        let reduced = partial_trace(rho.op(), layout.dims(), &keep)?;
        let label: String = keep.iter().map(|&p| layout.labels()[p].as_str()).collect();
        out.insert(label, hermitian_eigensystem(&reduced)?.rank(RANK_TOL));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn x_at_pi_over_4() {
        let x = x_coefficients(&AngleAssignment::all_pi_over_4()).unwrap();
        for v in x.0 {
            assert!((v - 2f64.powf(-1.5)).abs() < 1e-15);
        }
        let g = x_coefficients(&AngleAssignment::generic()).unwrap();
        assert_eq!(g.x(1), 0.7f64.sin() * 1.1f64.sin() * 0.4f64.sin());
        assert!(x_coefficients(&AngleAssignment {
            alpha: 0.0,
            ..AngleAssignment::generic()
        })
        .is_err());
    }

    #[test]
    fn first_row_of_u() {
        let a = AngleAssignment::generic();
        let x = x_coefficients(&a).unwrap();
        let u = coefficient_matrix(&a).unwrap();
        let want = [x.x(1), x.x(2), x.x(3), x.x(4), -x.x(5), -x.x(6), -x.x(7), -x.x(8)];
        for (j, w) in want.iter().enumerate() {
            assert_eq!(u[(0, j)], *w);
        }
    }

    #[test]
    fn psi_one_is_the_primed_product() {
        let a = AngleAssignment::generic();
        let psi = psi_states(&a).unwrap();
        let primed: Vec<Symbol> = ['a', 'b', 'c', 'd']
            .iter()
            .map(|&c| Symbol::letter(c, true).unwrap())
            .collect();
        assert!(psi.states[0].max_abs_diff(&product_ket(&primed, &a)) < 1e-12);
    }

    #[test]
    fn full_basis_has_no_complement() {
        let layout = PartyLayout::qubits(2);
        let members = (0..4)
            .map(|i| {
                crate::basis::ProductVector::new(vec![Ket::basis(2, i / 2), Ket::basis(2, i % 2)])
                    .unwrap()
            })
            .collect();
        let b = ProductBasis::orthogonal(layout, members).unwrap();
        assert!(build_rho(&b).is_err());
    }

    #[test]
    fn bell_state_is_npt() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = DensityMatrix::pure(&Ket::from_real(&[s, 0.0, 0.0, s]), PartyLayout::qubits(2), "bell")
            .unwrap();
        let cut = &bipartitions(2).unwrap()[0];
        let r = is_ppt(&rho, cut, 1e-10).unwrap();
        assert!(!r.ppt);
        assert!((r.min_eigenvalue + 0.5).abs() < 1e-12);
    }

    #[test]
    fn seven_bipartitions_of_four() {
        let labels = crate::basis::default_labels(4);
        let cuts: Vec<String> = bipartitions(4)
            .unwrap()
            .iter()
            .map(|p| p.label_string(&labels))
            .collect();
        assert_eq!(cuts.len(), 7);
        assert!(cuts.contains(&"AB|CD".to_string()));
        assert!(cuts.contains(&"A|BCD".to_string()));
        assert!(cuts.contains(&"ABC|D".to_string()));
    }

    #[test]
    fn reduced_ranks_of_simple_states() {
        let layout = PartyLayout::qubits(4);
        let mm = DensityMatrix::maximally_mixed(layout.clone());
        assert_eq!(reduced_ranks(&mm).unwrap()["AB"], 4);
        let pure = DensityMatrix::pure(&Ket::basis(16, 0), layout, "0000").unwrap();
        assert_eq!(reduced_ranks(&pure).unwrap()["AB"], 1);
    }

    #[test]
    fn density_json_round_trip() {
        let rho = rho_family(&AngleAssignment::all_pi_over_4()).unwrap();
        let back = DensityMatrix::from_json(&rho.to_json()).unwrap();
        assert!(back.op().max_abs_diff(rho.op()) == 0.0);
        assert_eq!(back.layout(), rho.layout());
    }

    #[test]
    fn rejects_bad_density() {
        let layout = PartyLayout::qubits(2);
        assert!(DensityMatrix::new(HermitianOp::identity(4), layout.clone(), "").is_err());
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.5, 0.0),
            C64::new(-0.5, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ]));
        assert!(matches!(
            DensityMatrix::new(HermitianOp::new(m).unwrap(), layout, ""),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn rank_seven_at_pi_over_4() {
        let rho = rho_family(&AngleAssignment::uniform(FRAC_PI_4).unwrap()).unwrap();
        assert_eq!(rho.rank(1e-9).unwrap(), 7);
    }
}
