//! Merging parties of a product set and classifying unextendibility across
//! every coarse graining of a four-party layout.

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{
    check_unextendible, small_system_shortcut, PartyLayout, ProductBasis, ProductVector, ORTHO_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{orthogonal_complement_sample, tensor_product, Ket, RANK_TOL};

/// A grouping of party indices into disjoint, covering blocks.
///
/// Blocks are kept canonical: each block ascending, blocks ordered by their
/// smallest party.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoarsePartition {
    blocks: Vec<Vec<usize>>,
}

impl CoarsePartition {
    pub fn new(parties: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::InvalidPartition(format!(
                "need at least two blocks, got {}",
                blocks.len()
            )));
        }
        let mut seen = vec![false; parties];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &p in b {
                if p >= parties || seen[p] {
                    return Err(Error::InvalidPartition(format!(
                        "party {p} out of range or repeated"
                    )));
                }
                seen[p] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("party {missing} not covered")));
        }
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_by_key(|b| b[0]);
        Ok(CoarsePartition { blocks })
    }

    /// Every party in its own block.
    pub fn trivial(parties: usize) -> Self {
        CoarsePartition {
            blocks: (0..parties).map(|p| vec![p]).collect(),
        }
    }

    /// Parses strings such as `"AB|C|D"` against the layout's labels.
    /// Single-character labels are matched character by character.
    pub fn parse(text: &str, layout: &PartyLayout) -> Result<Self> {
        let blocks = text
            .split('|')
            .map(|part| {
                let part = part.trim();
                if part.is_empty() {
                    return Err(Error::InvalidPartition(format!("empty block in {text:?}")));
                }
                part.chars()
                    .map(|c| {
                        layout.index_of(&c.to_string()).ok_or_else(|| {
                            Error::InvalidPartition(format!("unknown party {c:?} in {text:?}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layout.parties(), blocks)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn parties(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Party indices in block order; the ordering of merged tensor factors.
    pub fn party_order(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn merged_dims(&self, layout: &PartyLayout) -> Vec<usize> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&p| layout.dims()[p]).product())
            .collect()
    }

    pub fn merged_labels(&self, labels: &[String]) -> Vec<String> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&p| labels[p].as_str()).collect())
            .collect()
    }

    pub fn label_string(&self, labels: &[String]) -> String {
        self.merged_labels(labels).join("|")
    }

    pub fn merged_layout(&self, layout: &PartyLayout) -> Result<PartyLayout> {
        PartyLayout::new(self.merged_dims(layout), self.merged_labels(layout.labels()))
    }

    /// Whether every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &CoarsePartition) -> bool {
        self.blocks
            .iter()
            .all(|b| coarser.blocks.iter().any(|c| b.iter().all(|p| c.contains(p))))
    }

    pub fn kind(&self) -> GrainingKind {
        let mut sizes: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        match sizes.as_slice() {
            [1, 1, 2] => GrainingKind::ThreeBlock,
            [2, 2] => GrainingKind::TwoByTwo,
            [1, 3] => GrainingKind::ThreeOne,
            _ => GrainingKind::Other,
        }
    }

    /// The partition obtained by relabelling parties: party `p` becomes
    /// `map[p]`.
    pub fn relabelled(&self, map: &[usize]) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&p| map[p]).collect())
            .collect();
        Self::new(self.parties(), blocks)
    }
}

/// Shape of a coarse graining of a four-party layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrainingKind {
    /// `C^2 ⊗ C^2 ⊗ C^4` for qubits.
    ThreeBlock,
    /// `C^4 ⊗ C^4` for qubits.
    TwoByTwo,
    /// `C^8 ⊗ C^2` for qubits.
    ThreeOne,
    Other,
}

/// Regroups every member so each block of parties becomes one party.
pub fn coarse_grain(basis: &ProductBasis, partition: &CoarsePartition) -> Result<ProductBasis> {
    let layout = basis.layout();
    if partition.parties() != layout.parties() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} parties, layout has {}",
            partition.parties(),
            layout.parties()
        )));
    }
    let merged_layout = partition.merged_layout(layout)?;
    let members = basis
        .members()
        .iter()
        .map(|m| {
            let comps = partition
                .blocks
                .iter()
                .map(|b| {
                    let factors: Vec<Ket> = b.iter().map(|&p| m.component(p).clone()).collect();
                    tensor_product(&factors)
                })
                .collect::<Result<Vec<_>>>()?;
            ProductVector::new(comps)
        })
        .collect::<Result<Vec<_>>>()?;
    ProductBasis::new(merged_layout, members)
}

/// Every partition of `parties` parties into at least two blocks, the
/// finest first, then by decreasing block count.
pub fn all_partitions(parties: usize) -> Result<Vec<CoarsePartition>> {
    if parties < 2 {
        return Err(Error::InvalidLayout("need at least two parties".into()));
    }
    // Restricted growth strings: party p joins a block numbered at most one
    // past the largest used so far.
    fn rec(p: usize, n: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p == n {
            out.push(labels.clone());
            return;
        }
        let next = labels.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            labels.push(b);
            rec(p + 1, n, labels, out);
            labels.pop();
        }
    }
    let mut strings = Vec::new();
    rec(0, parties, &mut Vec::new(), &mut strings);
    let mut out = Vec::new();
    for s in strings {
        let count = s.iter().max().map_or(0, |m| m + 1);
        if count < 2 {
            continue;
        }
        let blocks = (0..count)
            .map(|b| (0..parties).filter(|&p| s[p] == b).collect())
            .collect();
        out.push(CoarsePartition::new(parties, blocks)?);
    }
    out.sort_by(|a, b| b.block_count().cmp(&a.block_count()).then(a.blocks().cmp(b.blocks())));
    Ok(out)
}

/// The 13 nontrivial coarse grainings of a four-party layout: six
/// three-block partitions (merged pairs in lexicographic order), then the
/// three 2+2 pairings, then the four 3+1 splits.
pub fn enumerate_coarse_grainings(layout: &PartyLayout) -> Result<Vec<CoarsePartition>> {
    if layout.parties() != 4 {
        return Err(Error::InvalidLayout(format!(
            "coarse-graining enumeration needs 4 parties, got {}",
            layout.parties()
        )));
    }
    let mut out = Vec::with_capacity(13);
    for i in 0..4 {
        for j in i + 1..4 {
            let mut blocks = vec![vec![i, j]];
            blocks.extend((0..4).filter(|p| *p != i && *p != j).map(|p| vec![p]));
            out.push(CoarsePartition::new(4, blocks)?);
        }
    }
    for partner in 1..4 {
        let rest: Vec<usize> = (1..4).filter(|p| *p != partner).collect();
        out.push(CoarsePartition::new(4, vec![vec![0, partner], rest])?);
    }
    for single in (0..4).rev() {
        let rest: Vec<usize> = (0..4).filter(|p| *p != single).collect();
        out.push(CoarsePartition::new(4, vec![rest, vec![single]])?);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct GrainingVerdict {
    pub partition: String,
    #[serde(skip)]
    pub blocks: CoarsePartition,
    pub kind: GrainingKind,
    pub layout: Vec<usize>,
    pub unextendible: bool,
    pub witness: Option<ProductVector>,
    pub resolved_by_shortcut: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrainingReport {
    pub size: usize,
    /// Verdict at the uncoarsened layout.
    pub fine_unextendible: bool,
    pub grainings: Vec<GrainingVerdict>,
    /// UPB in at least one three-block graining.
    pub in_three_block_set: bool,
    /// UPB in at least one 2+2 graining.
    pub in_two_by_two_set: bool,
    pub three_block_count: usize,
    pub two_by_two_count: usize,
}

impl GrainingReport {
    pub fn verdict(&self, partition: &str) -> Option<&GrainingVerdict> {
        self.grainings.iter().find(|g| g.partition == partition)
    }

    pub fn upb_partitions(&self) -> Vec<&str> {
        self.grainings
            .iter()
            .filter(|g| g.unextendible)
            .map(|g| g.partition.as_str())
            .collect()
    }
}

/// Runs the unextendibility decision on one graining. 3+1 splits of sets
/// below the `2d` bound are settled without search when `use_shortcut`.
pub fn graining_verdict(
    basis: &ProductBasis,
    partition: &CoarsePartition,
    use_shortcut: bool,
) -> Result<GrainingVerdict> {
    let grained = coarse_grain(basis, partition)?;
    let label = partition.label_string(basis.layout().labels());
    let kind = partition.kind();
    let layout = grained.layout().dims().to_vec();
    if use_shortcut && kind == GrainingKind::ThreeOne && small_system_shortcut(&grained).is_some() {
        return Ok(GrainingVerdict {
            partition: label,
            blocks: partition.clone(),
            kind,
            layout,
            unextendible: false,
            witness: None,
            resolved_by_shortcut: true,
        });
    }
    let v = check_unextendible(&grained, ORTHO_TOL);
    Ok(GrainingVerdict {
        partition: label,
        blocks: partition.clone(),
        kind,
        layout,
        unextendible: v.unextendible,
        witness: v.witness,
        resolved_by_shortcut: false,
    })
}

/// Decides unextendibility at every coarse graining of a four-party set.
pub fn classify_upb_across_grainings(basis: &ProductBasis) -> Result<GrainingReport> {
    let partitions = enumerate_coarse_grainings(basis.layout())?;
    let fine_unextendible = check_unextendible(basis, ORTHO_TOL).unextendible;
    let grainings = partitions
        .par_iter()
        .map(|p| graining_verdict(basis, p, true))
        .collect::<Result<Vec<_>>>()?;
    let count = |kind| {
        grainings
            .iter()
            .filter(|g| g.kind == kind && g.unextendible)
            .count()
    };
    let three_block_count = count(GrainingKind::ThreeBlock);
    let two_by_two_count = count(GrainingKind::TwoByTwo);
    Ok(GrainingReport {
        size: basis.len(),
        fine_unextendible,
        in_three_block_set: three_block_count > 0,
        in_two_by_two_set: two_by_two_count > 0,
        three_block_count,
        two_by_two_count,
        grainings,
    })
}

/// A product vector orthogonal to a `x|y|pair` graining, built from the
/// identical-component structure of the members.
#[derive(Clone, Debug, Serialize)]
pub struct SharedComponentWitness {
    pub partition: String,
    #[serde(skip)]
    pub blocks: CoarsePartition,
    pub first_party: usize,
    pub second_party: usize,
    /// Members whose `first_party` components coincide.
    pub first_rows: Vec<usize>,
    /// Members whose `second_party` components coincide.
    pub second_rows: Vec<usize>,
    /// The remaining members; their merged components span at most three
    /// dimensions.
    pub remaining_rows: Vec<usize>,
    /// Witness components in the graining's canonical block order.
    pub witness: ProductVector,
}

fn all_collinear<'a>(mut it: impl Iterator<Item = &'a Ket>) -> bool {
    match it.next() {
        None => true,
        Some(first) => it.all(|k| k.projective_eq(first, 1e-9)),
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Looks for the identical-component structure that rules out
/// unextendibility at the `x|y|pair` graining of a four-qubit set of size
/// `n`: `n-3-m` members split into `k` sharing their `x` component and the
/// rest sharing their `y` component, while the other `m+3` members contain
/// `m+1` with pairwise dependent merged components. Both role assignments
/// of the two unmerged parties are tried.
pub fn shared_component_witness(
    basis: &ProductBasis,
    merged_pair: [usize; 2],
    m: usize,
) -> Result<Option<SharedComponentWitness>> {
    let layout = basis.layout();
    if layout.dims() != [2, 2, 2, 2] {
        return Err(Error::InvalidLayout("four-qubit layout required".into()));
    }
    let [p, q] = merged_pair;
    if p >= 4 || q >= 4 || p == q {
        return Err(Error::InvalidPartition(format!("bad merged pair {merged_pair:?}")));
    }
    let n = basis.len();
    if n < 4 || m > n - 4 {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= m <= n - 4, got m = {m}, n = {n}"
        )));
    }
    let (p, q) = (p.min(q), p.max(q));
    let others: Vec<usize> = (0..4).filter(|x| *x != p && *x != q).collect();
    let partition = CoarsePartition::new(4, vec![vec![others[0]], vec![others[1]], vec![p, q]])?;
    let grained = coarse_grain(basis, &partition)?;
    let merged: Vec<Ket> = basis
        .members()
        .iter()
        .map(|v| tensor_product(&[v.component(p).clone(), v.component(q).clone()]))
        .collect::<Result<_>>()?;
    let r = n - 3 - m;

    for (first, second) in [(others[0], others[1]), (others[1], others[0])] {
        for rows in combinations(n, r) {
            let remaining: Vec<usize> = (0..n).filter(|i| !rows.contains(i)).collect();
            if !has_dependent_group(&remaining, &merged, m + 1) {
                continue;
            }
            for mask in 0u32..(1 << r) {
                let (k_rows, g_rows): (Vec<usize>, Vec<usize>) =
                    rows.iter().enumerate().fold((vec![], vec![]), |mut acc, (bit, &row)| {
                        if mask >> bit & 1 == 1 {
                            acc.0.push(row);
                        } else {
                            acc.1.push(row);
                        }
                        acc
                    });
                let comp = |rows: &[usize], party: usize| -> Vec<Ket> {
                    rows.iter()
                        .map(|&i| basis.members()[i].component(party).clone())
                        .collect()
                };
                let f = comp(&k_rows, first);
                let g = comp(&g_rows, second);
                if !all_collinear(f.iter()) || !all_collinear(g.iter()) {
                    continue;
                }
                let f_perp = orthogonal_complement_sample(&f[..f.len().min(1)], 2, RANK_TOL)?;
                let g_perp = orthogonal_complement_sample(&g[..g.len().min(1)], 2, RANK_TOL)?;
                let rest: Vec<Ket> = remaining.iter().map(|&i| merged[i].clone()).collect();
                let phi = orthogonal_complement_sample(&rest, 4, RANK_TOL)?;
                let (Some(f_perp), Some(g_perp), Some(phi)) = (f_perp, g_perp, phi) else {
                    continue;
                };
                // components in canonical block order: others[0], others[1], pair
                let (c0, c1) = if first == others[0] {
                    (f_perp, g_perp)
                } else {
                    (g_perp, f_perp)
                };
                let witness = ProductVector::new(vec![c0, c1, phi])?;
                if grained.max_overlap_with(&witness) > ORTHO_TOL {
                    continue;
                }
                return Ok(Some(SharedComponentWitness {
                    partition: partition.label_string(layout.labels()),
                    blocks: partition.clone(),
                    first_party: first,
                    second_party: second,
                    first_rows: k_rows,
                    second_rows: g_rows,
                    remaining_rows: remaining,
                    witness,
                }));
            }
        }
    }
    Ok(None)
}

fn has_dependent_group(rows: &[usize], merged: &[Ket], need: usize) -> bool {
    if need <= 1 {
        return !rows.is_empty() || need == 0;
    }
    rows.iter().any(|&i| {
        rows.iter()
            .filter(|&&j| merged[j].projective_eq(&merged[i], 1e-9))
            .count()
            >= need
    })
}
