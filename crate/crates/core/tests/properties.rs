//! Cross-module invariants, checked over randomized models and exhaustively
//! over small levels.

mod common;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use common::brute_force_invariants;
use nimrep_core::bcft::annulus_from_characters;
use nimrep_core::characters::{characters, s_transform_residual_with, tail_bound};
use nimrep_core::fusion::verlinde;
use nimrep_core::invariants::{enumerate_physical, vacuum_pairing};
use nimrep_core::modular_data::{build_minimal, build_su2};
use nimrep_core::nimreps::{enumerate_su2_nimreps, regular_nimrep, verify};
use nimrep_core::numeric::CMatrix;
use nimrep_core::{IntMatrix, ModularData, Precision};

fn model() -> impl Strategy<Value = (bool, u32, u32)> {
    prop_oneof![
        (1u32..=20).prop_map(|k| (true, k, 0)),
        (3u32..=10, 2u32..10)
            .prop_filter("coprime p > p'", |&(p, pp)| pp < p && num_integer::gcd(p, pp) == 1)
            .prop_map(|(p, pp)| (false, p, pp)),
    ]
}

fn build((su2, a, b): (bool, u32, u32), digits: u32) -> ModularData {
    let p = Precision::new(digits);
    if su2 {
        build_su2(a, p).unwrap()
    } else {
        build_minimal(a, b, p).unwrap()
    }
}

fn ten_to(e: i32) -> f64 {
    10f64.powi(e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn modular_relations(m in model(), digits in 30u32..=70) {
        let md = build(m, digits);
        let tol = ten_to(-(digits as i32) + 10);
        let r = md.report();
        prop_assert!(r.unitarity < tol, "unitarity {:e}", r.unitarity);
        prop_assert!(r.modular_relation < tol, "(ST)^3 = S^2: {:e}", r.modular_relation);
    }

    #[test]
    fn dimension_homomorphism(m in model(), digits in 30u32..=60) {
        let md = build(m, digits);
        let fr = verlinde(&md).unwrap();
        let d: Vec<f64> = md.quantum_dims().iter().map(|x| x.to_f64()).collect();
        let dims = md.quantum_dims();
        let bits = md.precision().bits();
        let tol = ten_to(-(digits as i32) + 15);
        for s in 0..md.len() {
            for r in 0..md.len() {
                let mut lhs = rug::Float::new(bits);
                for (t, dt) in dims.iter().enumerate() {
                    lhs += rug::Float::with_val(bits, dt * fr.get(s, r, t));
                }
                let rhs = rug::Float::with_val(bits, &dims[s] * &dims[r]);
                let diff = (lhs - rhs).abs().to_f64();
                prop_assert!(diff <= tol * d[s].abs().max(1.0) * d[r].abs().max(1.0), "({s},{r}): {diff:e}");
            }
        }
    }

    #[test]
    fn verlinde_permutation_covariance(seed in any::<u64>(), k in 1u32..=8) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        for md in [build_minimal(4, 3, Precision::new(50)).unwrap(), build_su2(k, Precision::new(50)).unwrap()] {
            let n = md.len();
            let mut rest: Vec<usize> = (1..n).collect();
            rest.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
            let perm: Vec<usize> = std::iter::once(0).chain(rest).collect();
            let fr = verlinde(&md).unwrap();
            let fp = verlinde(&md.permuted(&perm).unwrap()).unwrap();
            for s in 0..n {
                for r in 0..n {
                    for t in 0..n {
                        prop_assert_eq!(fp.get(s, r, t), fr.get(perm[s], perm[r], perm[t]));
                    }
                }
            }
        }
    }

    #[test]
    fn characters_count_states(m in model(), order in 1usize..120) {
        let md = build(m, 40);
        for chi in characters(&md, order).unwrap() {
            prop_assert!(chi.coeffs().iter().all(|c| *c >= BigInt::zero()));
            prop_assert!(chi.leading().is_some());
        }
    }

    #[test]
    fn residual_covers_tail(m in model(), order in 20usize..200, beta in 3.0f64..12.0) {
        let md = build(m, 40);
        if let Ok(r) = s_transform_residual_with(&md, order, beta, 1.0) {
            let q = (-beta).exp();
            let tail: f64 = (0..md.len()).map(|rho| tail_bound(&md, rho, order, q)).fold(0.0, f64::max);
            prop_assert!(r.residual() >= tail);
        }
    }
}

#[test]
fn completeness_oracle_through_level_16() {
    for k in 1..=16u32 {
        let md = build_su2(k, Precision::new(50)).unwrap();
        let fast: BTreeSet<IntMatrix> = enumerate_physical(&md).unwrap().iter().map(|z| z.z().clone()).collect();
        assert_eq!(fast, brute_force_invariants(&md), "k={k}");
    }
}

#[test]
fn invariants_pair_the_vacuum_positively() {
    for k in 1..=16u32 {
        let md = build_su2(k, Precision::new(50)).unwrap();
        let d: Vec<f64> = md.quantum_dims().iter().map(|x| x.to_f64()).collect();
        for z in enumerate_physical(&md).unwrap() {
            assert!(vacuum_pairing(&md, z.z()) > 0.0, "k={k} {}", z.tag());
            let row: f64 = (0..md.len()).map(|m| z.z().get(0, m) as f64 * d[m]).sum();
            assert!(row >= 1.0 - 1e-12, "k={k} {}", z.tag());
        }
    }
}

#[test]
fn emitted_nimreps_are_exact_and_transpose_symmetric() {
    for k in 1..=16u32 {
        let md = build_su2(k, Precision::new(50)).unwrap();
        let fr = verlinde(&md).unwrap();
        let chars = characters(&md, 30).unwrap();
        let sizes: BTreeSet<usize> = enumerate_physical(&md).unwrap().iter().map(|z| z.trace()).collect();
        let mut nrs = vec![regular_nimrep(&fr)];
        for m in sizes {
            nrs.extend(enumerate_su2_nimreps(&md, m).unwrap());
        }
        for nr in &nrs {
            assert!(verify(nr, &fr).passed(), "k={k} {:?}", nr.name());
            for (rho, mat) in nr.mats().iter().enumerate() {
                assert_eq!(nr.mat(md.conj()[rho]), &mat.transpose());
            }
            for a in 0..nr.size() {
                for b in a..nr.size() {
                    let ab = annulus_from_characters(nr, &chars, a, b).unwrap();
                    let ba = annulus_from_characters(nr, &chars, b, a).unwrap();
                    assert!(ab.z_ab.is_nonnegative());
                    assert_eq!(ab.z_ab, ba.z_ab);
                }
            }
        }
    }
}

#[test]
fn s_matrix_is_symmetric_for_builtins() {
    for md in [build_su2(7, Precision::new(50)).unwrap(), build_minimal(7, 4, Precision::new(50)).unwrap()] {
        let s: &CMatrix = md.s();
        assert!(s.max_abs_diff(&s.transpose()) < 1e-45);
    }
}
