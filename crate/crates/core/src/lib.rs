//! Modular data of rational conformal field theories and the combinatorics
//! built on it: Verlinde fusion rules, physical modular invariants, nimreps
//! and their Dynkin-diagram generators, exact q-series characters, boundary
//! annulus spectra with the open/closed channel check, and index data of
//! chiral extensions.
//!
//! Exact objects (fusion coefficients, invariants, nimreps, character
//! coefficients) are integers or rationals throughout. Analytic quantities
//! use MPFR floats at a caller-chosen decimal precision.

pub mod bcft;
pub mod characters;
pub mod error;
pub mod fusion;
pub mod graphs;
pub mod intmat;
pub mod invariants;
pub mod modular_data;
pub mod nimreps;
pub mod numeric;
pub mod persistence;
pub mod qseries;

pub use bcft::{
    annulus, full_report, heat_kernel_all_pairs, heat_kernel_check, index_report, parse_theta, AnnulusSpectrum,
    FullReport, IndexReport, Quantity, ReportOptions,
};
pub use characters::{character, characters, s_transform_residual, ChannelResidual};
pub use error::{Error, Result};
pub use fusion::{verify_axioms, verlinde, FusionRing};
pub use graphs::{canonical_form, connected_graphs, graph_by_name, graph_name};
pub use intmat::IntMatrix;
pub use invariants::{enumerate_physical, ModularInvariant};
pub use modular_data::{build_minimal, build_su2, load_model, load_model_str, ModelDocument, ModelFamily, ModularData};
pub use nimreps::{
    enumerate_su2_nimreps, generate_from_generator, psi_matrix, regular_nimrep, spectrum_match, verify, Nimrep,
};
pub use numeric::Precision;
pub use persistence::Cache;
pub use qseries::QSeries;
