//! Unextendible product bases in small multiqubit systems: extendibility
//! decisions, coarse grainings, symbolic orthogonal matrices, the rank-7
//! PPT entangled state built from a size-9 UPB and its geometric measure of
//! entanglement.

pub mod basis;
pub mod catalog;
pub mod coarse;
pub mod error;
pub mod gme;
pub mod linalg;
pub mod ppt;
pub mod uom;

pub use basis::{
    check_pairwise_orthogonality, check_unextendible, small_system_shortcut, ExtendibilityVerdict,
    PartyLayout, ProductBasis, ProductVector,
};
pub use catalog::{builtin, load_table, reproduce_counts, CatalogEntry};
pub use coarse::{classify_upb_across_grainings, coarse_grain, enumerate_coarse_grainings, CoarsePartition};
pub use error::{Error, Result};
pub use gme::{seesaw_maximize, GmeResult, SeesawOptions};
pub use linalg::{HermitianOp, Ket, C64};
pub use ppt::{build_rho, is_ppt, rho_family, DensityMatrix};
pub use uom::{instantiate, AngleAssignment, SymbolicUom, TransformStep};
