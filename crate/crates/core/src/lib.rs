//! Regularized nonclassicality quasiprobabilities for single-mode bosonic
//! states.
//!
//! The crate evaluates the filtered phase-space function `P_w(α)` of a
//! truncated Fock-space state, computes the bounds of `P_w` over states
//! built from at most `r` coherent-state superpositions and over mixtures of
//! pure Gaussian states, and turns observed extrema into certificates for a
//! minimal degree of nonclassicality and for quantum non-Gaussianity.
//!
//! Modules, bottom up:
//!
//! - [`special`]: log-factorials, Laguerre recurrences, complex Bessel `J₁`.
//! - [`fock`]: Fock vectors, coherent superpositions, Gaussian states,
//!   displacement matrix elements.
//! - [`witness`]: the diagonal witness spectrum `c_{w,n}` and `P_w(α)`.
//! - [`optim`]: genetic search with quasi-Newton polish, plus small 1-D and
//!   simplex helpers.
//! - [`bounds`]: overall extrema, the critical-`w` table and optimized
//!   bounds over `M_r` and the Gaussian hull.
//! - [`certify`]: certificates from observed extrema and a bounds table.
//! - [`state`]: the textual state descriptor grammar.
//! - [`io`]: CSV and JSON serialization of grids and tables.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod certify;
pub mod error;
pub mod fock;
pub mod io;
pub mod optim;
pub mod special;
pub mod state;
pub mod witness;

pub use bounds::{
    bounds_table, cat_scan_bounds, critical_table, extrema_cutoff, extremum_kinks, gaussian_point,
    optimize_gaussian_bounds, optimize_superposition_bounds, overall_extrema, BoundEntry,
    BoundsConfig, BoundsRecord, BoundsTable, CatScan, CriticalRow, CriticalTable, Direction,
    Family, GaussianSearch, OverallExtrema, Witness,
};
pub use certify::{certify_fock, certify_state, Certificate, SearchSpec};
pub use error::{Error, Result};
pub use fock::{
    cat_state, cat_state_or_limit, coherent_overlap, coherent_state, displacement_matrix,
    fock_state, fock_via_coherent_ring, photon_added_squeezed, squeezed_coherent, CatParity,
    CoherentSuperposition, FockVector, GaussianPureState, Truncation,
};
pub use state::StateDescriptor;
pub use witness::{
    coherent_point, quasiprobability_grid, quasiprobability_point, superposition_expectation,
    witness_coefficients, GridSpec, QuasiprobabilityGrid, WitnessSpectrum,
};

/// Version string embedded in every emitted artifact.
pub const TOOL_VERSION: &str = concat!("nqp ", env!("CARGO_PKG_VERSION"));
