//! Inputs shared by the benchmarks.

use upb_core::catalog::builtins;
use upb_core::{rho_family, AngleAssignment, DensityMatrix, ProductBasis};

/// Every builtin set at its own angles, with its name.
pub fn catalog_bases() -> Vec<(String, ProductBasis)> {
    builtins()
        .into_iter()
        .map(|e| {
            let b = e.instantiate().expect("builtins instantiate");
            (e.name, b)
        })
        .collect()
}

/// The rank-7 state at all angles `π/4`.
pub fn quarter_rho() -> DensityMatrix {
    rho_family(&AngleAssignment::all_pi_over_4()).expect("closed forms agree")
}
