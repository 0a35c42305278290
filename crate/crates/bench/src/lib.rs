//! Shared fixtures for the criterion benches.

use nimrep_core::modular_data::{build_minimal, build_su2, ModularData};
use nimrep_core::numeric::Precision;

/// SU(2)_k at the default precision.
pub fn su2(k: u32) -> ModularData {
    build_su2(k, Precision::default()).expect("built-in SU(2) data")
}

/// Minimal model M(p, p') at the default precision.
pub fn minimal(p: u32, p_prime: u32) -> ModularData {
    build_minimal(p, p_prime, Precision::default()).expect("built-in minimal-model data")
}
