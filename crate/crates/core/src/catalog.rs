//! Bundled symbolic UPBs, the two reference transformation chains of the
//! size-9 family, and ingestion of external UPB tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::{check_unextendible, ProductBasis, ORTHO_TOL};
use crate::coarse::classify_upb_across_grainings;
use crate::error::{Error, Result};
use crate::uom::{instantiate, AngleAssignment, Pair, SymbolicUom, TransformStep, UomDoc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Bundled,
    ExternalTable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub size: usize,
    pub uom: SymbolicUom,
    pub provenance: Provenance,
}

impl CatalogEntry {
    fn bundled(name: &str, text: &str) -> Self {
        let uom = SymbolicUom::parse(text).expect("bundled matrix parses");
        CatalogEntry {
            name: name.to_string(),
            size: uom.row_count(),
            uom,
            provenance: Provenance::Bundled,
        }
    }

    /// The binding carried by the entry, else `AngleAssignment::generic()`.
    pub fn angles(&self) -> AngleAssignment {
        self.uom.binding().unwrap_or_else(AngleAssignment::generic)
    }

    pub fn instantiate(&self) -> Result<ProductBasis> {
        instantiate(&self.uom, &self.angles())
    }

    pub fn to_doc(&self) -> UomDoc {
        UomDoc {
            name: Some(self.name.clone()),
            ..self.uom.to_doc()
        }
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["size6", "size7", "threequbit", "size9-11th"];

const SIZE6: &str = "0 0 0 0 / 0 a a 1 / 1 0 b a / 1 a b' b / a 1 a' b' / a' a' 1 a'";
const SIZE7: &str = "0 0 0 0 / 0 a a 1 / 0 a' 1 a / 1 0 0 b / 1 a' a b' / a a 1 0 / a' 1 a' a'";
const THREE_QUBIT: &str = "0 0 0 / 1 a a' / a' 1 a / a a' 1";

const F11_U1: &str = "0 0 0 0 / 0 1 a a / 0 a 1 a' / 1 1 1 0 / 1 a 0 a / 1 0 a a' / a 0 1 a / a 1 0 a' / a' a' a' 1";
const F11_U2: &str = "0 0 1 a / 0 1 a 0 / 0 a 0 1 / 1 1 0 a / 1 a 1 0 / 1 0 a 1 / a 0 0 0 / a 1 1 1 / a' a' a' a'";
const F11_U3: &str = "0 1 a 0 / 0 a 0 1 / 0 0 1 a / 1 0 a 1 / 1 1 0 a / 1 a 1 0 / a 0 0 0 / a 1 1 1 / a' a' a' a'";

const F111_U2: &str = "1 a 0 0 / a 0 0 1 / 0 1 0 a / 0 a 1 1 / 1 0 1 a / a 1 1 0 / 0 0 a 0 / 1 1 a 1 / a' a' a' a'";
const F111_U3: &str = "0 0 a 0 / 0 1 0 a / 0 a 1 1 / 1 0 1 a / 1 a 0 0 / 1 1 a 1 / a 0 0 1 / a 1 1 0 / a' a' a' a'";
const F111_U4: &str = "0 0 0 a / 0 1 a 0 / 0 a 1 1 / 1 0 a 1 / 1 a 0 0 / 1 1 1 a / a 0 1 0 / a 1 0 1 / a' a' a' a'";
const F111_U5: &str = "0 0 1 a / 0 1 a 0 / 0 a 0 1 / 1 0 a 1 / 1 a 1 0 / 1 1 0 a / a 0 0 0 / a 1 1 1 / a' a' a' a'";

/// Returns a bundled entry by name; see [`BUILTIN_NAMES`].
pub fn builtin(name: &str) -> Result<CatalogEntry> {
    let text = match name {
        "size6" => SIZE6,
        "size7" => SIZE7,
        "threequbit" => THREE_QUBIT,
        "size9-11th" => F11_U2,
        _ => return Err(Error::UnknownBuiltin(name.to_string())),
    };
    let mut entry = CatalogEntry::bundled(name, text);
    if name == "threequbit" {
        entry.uom = entry.uom.with_binding(AngleAssignment::all_pi_over_4());
    }
    Ok(entry)
}

pub fn builtins() -> Vec<CatalogEntry> {
    BUILTIN_NAMES.iter().map(|n| builtin(n).expect("known name")).collect()
}

/// The 11th size-9 UPB with each column given its own letter (`a, b, c, d`
/// for parties `A, B, C, D`), the form used to build the rank-7 state.
pub fn size9_column_lettered() -> SymbolicUom {
    SymbolicUom::parse(F11_U2)
        .and_then(|u| u.with_column_letters())
        .expect("bundled matrix has one letter per column")
}

fn parse(text: &str) -> SymbolicUom {
    SymbolicUom::parse(text).expect("bundled matrix parses")
}

fn swap(column: usize) -> TransformStep {
    TransformStep::SymbolSwap {
        column,
        pair: Pair::Computational,
    }
}

fn row_perm(perm: [usize; 9]) -> TransformStep {
    TransformStep::RowPermute { perm: perm.to_vec() }
}

fn col_perm(perm: [usize; 4]) -> TransformStep {
    TransformStep::ColumnPermute { perm: perm.to_vec() }
}

/// `U1 → U2 → U3 → U4` of the first reference chain; `U4` coincides with `U2`.
pub fn family11_chain() -> Vec<(SymbolicUom, Vec<TransformStep>)> {
    vec![
        (
            parse(F11_U1),
            vec![
                swap(2),
                TransformStep::BasisRelabel {
                    column: 3,
                    first: Pair::Computational,
                    second: Pair::Letter('a'),
                },
            ],
        ),
        (parse(F11_U2), vec![col_perm([0, 2, 3, 1])]),
        (parse(F11_U3), vec![row_perm([2, 0, 1, 4, 5, 3, 6, 7, 8])]),
        (parse(F11_U2), vec![]),
    ]
}

/// `U1 → … → U6` of the second reference chain; `U6` coincides with `U1`.
pub fn family11_1_chain() -> Vec<(SymbolicUom, Vec<TransformStep>)> {
    vec![
        (parse(F11_U2), vec![col_perm([2, 3, 0, 1])]),
        (parse(F111_U2), vec![row_perm([6, 2, 3, 4, 0, 7, 1, 5, 8])]),
        (parse(F111_U3), vec![col_perm([0, 1, 3, 2])]),
        (parse(F111_U4), vec![swap(2)]),
        (parse(F111_U5), vec![row_perm([0, 1, 2, 5, 4, 3, 6, 7, 8])]),
        (parse(F11_U2), vec![]),
    ]
}

fn validate(entry: &CatalogEntry, verify_unextendible: bool) -> Result<()> {
    let basis = entry.instantiate()?;
    if verify_unextendible && !check_unextendible(&basis, ORTHO_TOL).unextendible {
        return Err(Error::Consistency(format!("{} is extendible", entry.name)));
    }
    Ok(())
}

/// Parses a JSON array of UOM objects. Entries keep file order, which is the
/// order ordinals such as "11th" refer to. Every entry must instantiate to
/// an orthogonal set; with `verify_unextendible` each is also re-checked.
pub fn parse_table(text: &str, verify_unextendible: bool) -> Result<Vec<CatalogEntry>> {
    let docs: Vec<serde_json::Value> = serde_json::from_str(text)?;
    docs.into_iter()
        .enumerate()
        .map(|(index, value)| {
            let wrap = |e: Error| Error::TableEntry {
                index,
                source: Box::new(e),
            };
            let doc: UomDoc = serde_json::from_value(value).map_err(|e| wrap(e.into()))?;
            let uom = SymbolicUom::from_doc(&doc).map_err(wrap)?;
            let entry = CatalogEntry {
                name: doc.name.unwrap_or_else(|| format!("table-{}", index + 1)),
                size: uom.row_count(),
                uom,
                provenance: Provenance::ExternalTable,
            };
            validate(&entry, verify_unextendible).map_err(wrap)?;
            Ok(entry)
        })
        .collect()
}

pub fn load_table(path: impl AsRef<Path>, verify_unextendible: bool) -> Result<Vec<CatalogEntry>> {
    parse_table(&std::fs::read_to_string(path)?, verify_unextendible)
}

pub fn table_to_json(entries: &[CatalogEntry]) -> String {
    let docs: Vec<UomDoc> = entries.iter().map(CatalogEntry::to_doc).collect();
    serde_json::to_string_pretty(&docs).expect("serializable")
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryCounts {
    pub name: String,
    pub three_block: Vec<String>,
    pub two_by_two: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountReport {
    pub three_block_count: usize,
    pub two_by_two_count: usize,
    pub entries: Vec<EntryCounts>,
}

/// Counts coarse-grained UPBs over all three-block and 2+2 grainings of
/// every entry, with the partitions that witness each count.
pub fn reproduce_counts(entries: &[CatalogEntry]) -> Result<CountReport> {
    use crate::coarse::GrainingKind;
    let mut out = CountReport {
        three_block_count: 0,
        two_by_two_count: 0,
        entries: Vec::with_capacity(entries.len()),
    };
    for entry in entries {
        let report = classify_upb_across_grainings(&entry.instantiate()?)?;
        let pick = |kind| {
            report
                .grainings
                .iter()
                .filter(|g| g.kind == kind && g.unextendible)
                .map(|g| g.partition.clone())
                .collect::<Vec<_>>()
        };
        let counts = EntryCounts {
            name: entry.name.clone(),
            three_block: pick(GrainingKind::ThreeBlock),
            two_by_two: pick(GrainingKind::TwoByTwo),
        };
        out.three_block_count += counts.three_block.len();
        out.two_by_two_count += counts.two_by_two.len();
        out.entries.push(counts);
    }
    Ok(out)
}
