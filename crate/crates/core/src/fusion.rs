//! Fusion rules `N^τ_{σρ}` from the Verlinde formula, their matrix form and
//! an exact axiom checker.

use rayon::prelude::*;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::intmat::IntMatrix;
use crate::modular_data::ModularData;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FusionRing {
    n: usize,
    conj: Vec<usize>,
    /// `coeffs[(σ·n + ρ)·n + τ] = N^τ_{σρ}`.
    coeffs: Vec<i64>,
}

impl FusionRing {
    /// Wrap a raw tensor without checking any axiom (see [`verify_axioms`]).
    pub fn from_tensor(n: usize, conj: Vec<usize>, coeffs: Vec<i64>) -> Result<Self> {
        if conj.len() != n || coeffs.len() != n * n * n || conj.iter().any(|&c| c >= n) {
            return Err(Error::InvalidDocument(format!(
                "fusion tensor for {n} sectors needs {} coefficients and an {n}-entry conjugation",
                n * n * n
            )));
        }
        Ok(FusionRing { n, conj, coeffs })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn conj(&self) -> &[usize] {
        &self.conj
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// `N^τ_{σρ}`.
    pub fn get(&self, sigma: usize, rho: usize, tau: usize) -> i64 {
        self.coeffs[(sigma * self.n + rho) * self.n + tau]
    }

    /// Nonzero `(σ, ρ, τ, N^τ_{σρ})` in lexicographic order.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, usize, i64)> {
        let n = self.n;
        let mut out = Vec::new();
        for s in 0..n {
            for r in 0..n {
                for t in 0..n {
                    let v = self.get(s, r, t);
                    if v != 0 {
                        out.push((s, r, t, v));
                    }
                }
            }
        }
        out
    }

    /// Sectors `τ` (with multiplicity) in `σ × ρ`.
    pub fn product(&self, sigma: usize, rho: usize) -> Vec<(usize, i64)> {
        (0..self.n)
            .filter_map(|t| {
                let v = self.get(sigma, rho, t);
                (v != 0).then_some((t, v))
            })
            .collect()
    }
}

/// Fusion rules by the Verlinde formula, together with the worst distance
/// of any raw coefficient from its rounded value.
pub fn verlinde_checked(md: &ModularData) -> Result<(FusionRing, f64)> {
    let n = md.len();
    let s = md.s();
    let bits = s.bits();
    let tol = md.precision().tolerance().to_f64();

    type Row = (usize, Vec<i64>, f64, Option<(usize, usize, f64)>);

    let rows: Vec<Row> = if s.is_real() {
        let sr: Vec<Vec<Float>> = (0..n)
            .map(|i| (0..n).map(|j| s[(i, j)].real().clone()).collect())
            .collect();
        let inv0: Vec<Float> = (0..n)
            .map(|k| Float::with_val(bits, sr[0][k].recip_ref()))
            .collect();
        (0..n)
            .into_par_iter()
            .map(|sigma| {
                let mut out = vec![0i64; n * n];
                let mut worst = 0.0f64;
                let mut bad = None;
                for rho in 0..n {
                    let w: Vec<Float> = (0..n)
                        .map(|k| {
                            let mut x = Float::with_val(bits, &sr[sigma][k] * &sr[rho][k]);
                            x *= &inv0[k];
                            x
                        })
                        .collect();
                    for tau in 0..n {
                        let mut acc = Float::new(bits);
                        for k in 0..n {
                            acc += &w[k] * &sr[tau][k];
                        }
                        let raw = acc.to_f64();
                        let rounded = raw.round();
                        let residual = (acc - rounded).abs().to_f64();
                        if residual > worst {
                            worst = residual;
                        }
                        if (residual > tol || rounded < 0.0) && bad.is_none() {
                            bad = Some((rho, tau, raw));
                        }
                        out[rho * n + tau] = rounded as i64;
                    }
                }
                (sigma, out, worst, bad)
            })
            .collect()
    } else {
        let inv0: Vec<Complex> = (0..n)
            .map(|k| Complex::with_val(bits, s[(0, k)].recip_ref()))
            .collect();
        let sbar: Vec<Vec<Complex>> = (0..n)
            .map(|i| (0..n).map(|j| Complex::with_val(bits, s[(i, j)].conj_ref())).collect())
            .collect();
        (0..n)
            .into_par_iter()
            .map(|sigma| {
                let mut out = vec![0i64; n * n];
                let mut worst = 0.0f64;
                let mut bad = None;
                for rho in 0..n {
                    let w: Vec<Complex> = (0..n)
                        .map(|k| {
                            let mut x = Complex::with_val(bits, &s[(sigma, k)] * &s[(rho, k)]);
                            x *= &inv0[k];
                            x
                        })
                        .collect();
                    for tau in 0..n {
                        let mut acc = Complex::new(bits);
                        for k in 0..n {
                            acc += &w[k] * &sbar[tau][k];
                        }
                        let (re, im) = acc.into_real_imag();
                        let raw = re.to_f64();
                        let rounded = raw.round();
                        let residual = (re - rounded).abs().to_f64().max(im.abs().to_f64());
                        if residual > worst {
                            worst = residual;
                        }
                        if (residual > tol || rounded < 0.0) && bad.is_none() {
                            bad = Some((rho, tau, raw));
                        }
                        out[rho * n + tau] = rounded as i64;
                    }
                }
                (sigma, out, worst, bad)
            })
            .collect()
    };

    let mut coeffs = vec![0i64; n * n * n];
    let mut worst = 0.0f64;
    for (sigma, out, w, bad) in rows {
        worst = worst.max(w);
        if let Some((rho, tau, value)) = bad {
            return Err(Error::IntegralityFailure {
                sigma,
                rho,
                tau,
                value,
                residual: w,
            });
        }
        coeffs[sigma * n * n..(sigma + 1) * n * n].copy_from_slice(&out);
    }
    Ok((
        FusionRing {
            n,
            conj: md.conj().to_vec(),
            coeffs,
        },
        worst,
    ))
}

/// Fusion rules `N^τ_{σρ} = Σ_κ S_σκ S_ρκ conj(S_τκ) / S_0κ`, rounded.
pub fn verlinde(md: &ModularData) -> Result<FusionRing> {
    verlinde_checked(md).map(|(fr, _)| fr)
}

/// Fusion matrix `(N_ρ)_{στ} = N^τ_{ρσ}`.
pub fn fusion_matrix(fr: &FusionRing, rho: usize) -> IntMatrix {
    IntMatrix::from_fn(fr.len(), |sigma, tau| fr.get(rho, sigma, tau))
}

/// One violated fusion-ring axiom with the first witness found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomViolation {
    Negative { sigma: usize, rho: usize, tau: usize, value: i64 },
    /// `N^τ_{0ρ} != δ_{ρτ}`.
    Unit { rho: usize, tau: usize, value: i64 },
    /// `N^0_{σρ} != δ_{ρ,σ̄}`.
    Conjugation { sigma: usize, rho: usize, value: i64 },
    Commutativity { sigma: usize, rho: usize, tau: usize },
    Associativity { sigma: usize, rho: usize, lambda: usize, tau: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub violations: Vec<AxiomViolation>,
    /// Number of failing index tuples per violation, same order.
    pub counts: Vec<usize>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, slot: &mut Option<usize>, v: AxiomViolation) {
        match slot {
            Some(i) => self.counts[*i] += 1,
            None => {
                *slot = Some(self.violations.len());
                self.violations.push(v);
                self.counts.push(1);
            }
        }
    }
}

/// Check every fusion-ring axiom exactly.
pub fn verify_axioms(fr: &FusionRing) -> AxiomReport {
    let n = fr.len();
    let mut report = AxiomReport::default();
    let (mut neg, mut unit, mut conj, mut comm, mut assoc) = (None, None, None, None, None);
    for s in 0..n {
        for r in 0..n {
            for t in 0..n {
                let v = fr.get(s, r, t);
                if v < 0 {
                    report.record(&mut neg, AxiomViolation::Negative { sigma: s, rho: r, tau: t, value: v });
                }
                if v != fr.get(r, s, t) {
                    report.record(&mut comm, AxiomViolation::Commutativity { sigma: s, rho: r, tau: t });
                }
            }
        }
    }
    for r in 0..n {
        for t in 0..n {
            let v = fr.get(0, r, t);
            if v != i64::from(r == t) {
                report.record(&mut unit, AxiomViolation::Unit { rho: r, tau: t, value: v });
            }
        }
    }
    for s in 0..n {
        for r in 0..n {
            let v = fr.get(s, r, 0);
            if v != i64::from(r == fr.conj()[s]) {
                report.record(&mut conj, AxiomViolation::Conjugation { sigma: s, rho: r, value: v });
            }
        }
    }
    for s in 0..n {
        for r in 0..n {
            for l in 0..n {
                for t in 0..n {
                    let lhs: i64 = (0..n).map(|k| fr.get(s, r, k) * fr.get(k, l, t)).sum();
                    let rhs: i64 = (0..n).map(|k| fr.get(r, l, k) * fr.get(s, k, t)).sum();
                    if lhs != rhs {
                        report.record(
                            &mut assoc,
                            AxiomViolation::Associativity { sigma: s, rho: r, lambda: l, tau: t },
                        );
                    }
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular_data::{build_minimal, build_su2};
    use crate::numeric::Precision;

    fn p50() -> Precision {
        Precision::new(50)
    }

    #[test]
    fn ising_sigma_squared() {
        let md = build_minimal(4, 3, p50()).unwrap();
        let fr = verlinde(&md).unwrap();
        let (eps, sigma) = (1, 2);
        assert_eq!(fr.get(sigma, sigma, 0), 1);
        assert_eq!(fr.get(sigma, sigma, eps), 1);
        assert_eq!(fr.get(sigma, sigma, sigma), 0);
        assert_eq!(fr.product(eps, sigma), vec![(sigma, 1)]);
    }

    #[test]
    fn su2_level_four_fundamental() {
        let fr = verlinde(&build_su2(4, p50()).unwrap()).unwrap();
        assert_eq!(fr.product(1, 1), vec![(0, 1), (2, 1)]);
    }

    #[test]
    fn vacuum_is_unit() {
        for md in [build_su2(6, p50()).unwrap(), build_minimal(7, 3, p50()).unwrap()] {
            let fr = verlinde(&md).unwrap();
            for r in 0..fr.len() {
                for t in 0..fr.len() {
                    assert_eq!(fr.get(0, r, t), i64::from(r == t));
                }
            }
        }
    }

    #[test]
    fn fusion_matrix_identity_and_transpose() {
        let fr = verlinde(&build_su2(5, p50()).unwrap()).unwrap();
        assert_eq!(fusion_matrix(&fr, 0), IntMatrix::identity(6));
        for r in 0..fr.len() {
            assert_eq!(fusion_matrix(&fr, fr.conj()[r]), fusion_matrix(&fr, r).transpose());
        }
    }

    #[test]
    fn su2_fundamental_is_path_graph() {
        for k in 1..=10u32 {
            let fr = verlinde(&build_su2(k, p50()).unwrap()).unwrap();
            let n = k as usize + 1;
            let path = IntMatrix::from_fn(n, |i, j| i64::from(i.abs_diff(j) == 1));
            assert_eq!(fusion_matrix(&fr, 1), path, "k = {k}");
        }
    }

    #[test]
    fn verlinde_output_passes_axioms() {
        for md in [
            build_su2(3, p50()).unwrap(),
            build_minimal(4, 3, p50()).unwrap(),
            build_minimal(5, 2, p50()).unwrap(),
            build_minimal(6, 5, p50()).unwrap(),
        ] {
            let report = verify_axioms(&verlinde(&md).unwrap());
            assert!(report.passed(), "{}: {:?}", md.name(), report);
        }
    }

    #[test]
    fn broken_unit_is_reported() {
        let fr = verlinde(&build_minimal(4, 3, p50()).unwrap()).unwrap();
        let mut coeffs = fr.coeffs().to_vec();
        coeffs[4] = 0; // N^1_{0,1}
        let broken = FusionRing::from_tensor(3, fr.conj().to_vec(), coeffs).unwrap();
        let report = verify_axioms(&broken);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, AxiomViolation::Unit { rho: 1, tau: 1, value: 0 })));
    }

    #[test]
    fn worst_residual_is_tiny() {
        let (_, worst) = verlinde_checked(&build_minimal(7, 4, p50()).unwrap()).unwrap();
        assert!(worst < 1e-40, "{worst}");
    }
}
