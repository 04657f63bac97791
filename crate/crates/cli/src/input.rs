use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use upb_core::basis::ProductBasisDoc;
use upb_core::catalog::{builtin, CatalogEntry, Provenance};
use upb_core::uom::UomDoc;
use upb_core::{AngleAssignment, CoarsePartition, DensityMatrix, PartyLayout, ProductBasis, SymbolicUom};

use crate::CliError;

/// Parses `α,β,γ,δ`; each value is a decimal in radians or the token `pi/4`.
pub fn parse_angles(text: &str) -> Result<AngleAssignment, CliError> {
    let values = text
        .split(',')
        .map(|t| match t.trim() {
            "pi/4" => Ok(FRAC_PI_4),
            other => other
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad angle {other:?}; expected radians or pi/4"))),
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let [a, b, c, d] = values[..] else {
        return Err(CliError::usage(format!("--angles needs four values, got {}", values.len())));
    };
    Ok(AngleAssignment::new(a, b, c, d)?)
}

pub fn parse_cut(text: &str, layout: &PartyLayout) -> Result<CoarsePartition, CliError> {
    Ok(CoarsePartition::parse(text, layout)?)
}

/// A set to check: either symbolic (with its angles) or numeric.
pub enum UpbSource {
    Symbolic(CatalogEntry),
    Numeric { name: String, basis: ProductBasis },
}

impl UpbSource {
    pub fn name(&self) -> &str {
        match self {
            UpbSource::Symbolic(e) => &e.name,
            UpbSource::Numeric { name, .. } => name,
        }
    }

    pub fn basis(&self, angles: Option<&AngleAssignment>) -> Result<ProductBasis, CliError> {
        match self {
            UpbSource::Symbolic(e) => Ok(upb_core::instantiate(&e.uom, &angles.copied().unwrap_or_else(|| e.angles()))?),
            UpbSource::Numeric { basis, .. } if angles.is_none() => Ok(basis.clone()),
            UpbSource::Numeric { .. } => Err(CliError::usage("--angles applies to symbolic inputs only")),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Reads a UOM document (`rows`) or a numeric product basis (`vectors`).
pub fn load_upb_file(path: &Path) -> Result<UpbSource, CliError> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    if value.get("rows").is_some() {
        let doc: UomDoc = serde_json::from_value(value).map_err(|e| CliError::usage(e.to_string()))?;
        let uom = SymbolicUom::from_doc(&doc)?;
        Ok(UpbSource::Symbolic(CatalogEntry {
            name: doc.name.unwrap_or_else(|| stem(path)),
            size: uom.row_count(),
            uom,
            provenance: Provenance::ExternalTable,
        }))
    } else if value.get("vectors").is_some() {
        let doc: ProductBasisDoc = serde_json::from_value(value).map_err(|e| CliError::usage(e.to_string()))?;
        Ok(UpbSource::Numeric {
            name: stem(path),
            basis: doc.into_basis()?,
        })
    } else {
        Err(CliError::usage(format!(
            "{}: expected a UOM object with \"rows\" or a basis with \"vectors\"",
            path.display()
        )))
    }
}

/// `--in` and `--builtin` are exclusive; exactly one is required.
pub fn load_upb(path: Option<&Path>, name: Option<&str>) -> Result<UpbSource, CliError> {
    match (path, name) {
        (Some(p), None) => load_upb_file(p),
        (None, Some(n)) => Ok(UpbSource::Symbolic(builtin(n)?)),
        _ => Err(CliError::usage("give exactly one of --in <file> or --builtin <name>")),
    }
}

/// A path if one exists on disk, otherwise a builtin name.
pub fn load_upb_spec(spec: &str) -> Result<UpbSource, CliError> {
    let p = Path::new(spec);
    if p.exists() {
        load_upb_file(p)
    } else {
        Ok(UpbSource::Symbolic(builtin(spec)?))
    }
}

pub fn load_uom_spec(spec: &str) -> Result<SymbolicUom, CliError> {
    match load_upb_spec(spec)? {
        UpbSource::Symbolic(e) => Ok(e.uom),
        UpbSource::Numeric { .. } => Err(CliError::usage(format!("{spec}: symbolic UOM required"))),
    }
}

pub fn load_rho(path: &Path) -> Result<DensityMatrix, CliError> {
    Ok(DensityMatrix::from_json(&read(path)?)?)
}
