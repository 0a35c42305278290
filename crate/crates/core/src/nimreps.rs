//! Non-negative integer matrix representations of fusion rings.
//!
//! A nimrep assigns to each sector `ρ` a matrix `n^ρ` over a set of boundary
//! labels with `n^0 = 1`, `n^σ n^ρ = Σ_τ N^τ_{σρ} n^τ` and
//! `n^ρ̄ = (n^ρ)ᵀ`. All three conditions are checked in exact integer
//! arithmetic. Spectral data (matching with a modular invariant and the
//! boundary-state matrix `ψ`) is computed at the precision of the modular
//! data.

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::fusion::{fusion_matrix, verlinde, FusionRing};
use crate::graphs::{canonical_form, connected_graphs, graph_name};
use crate::intmat::{bigint_to_float, eval_poly, IntMatrix};
use crate::invariants::{ModularInvariant, DEFAULT_NODE_BUDGET};
use crate::modular_data::ModularData;
use crate::numeric::{cabs, null_space, CMatrix, Precision};

/// Tolerance for eigenvalue multisets in [`spectrum_match`].
pub const SPECTRUM_TOLERANCE: f64 = 1e-15;

/// Tolerance for unitarity and the Cardy–Verlinde identity in [`psi_matrix`].
pub const CARDY_TOLERANCE: f64 = 1e-12;

/// Whether a combinatorial nimrep comes from an actual chiral extension
/// cannot be decided from integer data; reports always say so.
pub const REALIZABILITY: &str = "not decided";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Nimrep {
    labels: Vec<String>,
    mats: Vec<IntMatrix>,
    name: Option<String>,
}

impl Nimrep {
    /// Build from labels and one matrix per sector. Shapes are checked here;
    /// the representation property is left to [`verify`].
    pub fn new(labels: Vec<String>, mats: Vec<IntMatrix>) -> Result<Self> {
        let m = labels.len();
        if m == 0 {
            return Err(Error::InvalidNimrep("no boundary labels".into()));
        }
        if mats.is_empty() {
            return Err(Error::InvalidNimrep("no sector matrices".into()));
        }
        if let Some((rho, mat)) = mats.iter().enumerate().find(|(_, a)| a.n() != m) {
            return Err(Error::InvalidNimrep(format!(
                "n^{rho} is {0}x{0} but there are {m} labels",
                mat.n()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::InvalidNimrep(format!("duplicate label {dup:?}")));
        }
        Ok(Nimrep {
            labels,
            mats,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mats(&self) -> &[IntMatrix] {
        &self.mats
    }

    pub fn mat(&self, rho: usize) -> &IntMatrix {
        &self.mats[rho]
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Number of boundary labels.
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    /// Number of sectors.
    pub fn sectors(&self) -> usize {
        self.mats.len()
    }

    /// Resolve a boundary label by name, falling back to its index.
    pub fn resolve_label(&self, label: &str) -> Result<usize> {
        if let Some(i) = self.labels.iter().position(|l| l == label) {
            return Ok(i);
        }
        label
            .parse::<usize>()
            .ok()
            .filter(|&i| i < self.size())
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

/// The fusion matrices themselves, with boundary labels equal to sectors.
pub fn regular_nimrep(fr: &FusionRing) -> Nimrep {
    let n = fr.len();
    Nimrep {
        labels: (0..n).map(|i| i.to_string()).collect(),
        mats: (0..n).map(|rho| fusion_matrix(fr, rho)).collect(),
        name: Some("regular".into()),
    }
}

/// [`regular_nimrep`] labeled by the sector names of `md`.
pub fn regular_nimrep_named(md: &ModularData, fr: &FusionRing) -> Nimrep {
    let mut nr = regular_nimrep(fr);
    nr.labels = md.sectors().iter().map(|s| s.name.clone()).collect();
    nr
}

/// One violated nimrep condition with its first witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NimrepViolation {
    /// Wrong number of sector matrices.
    SectorCount { expected: usize, found: usize },
    Negative { sector: usize, row: usize, col: usize, value: i64 },
    /// `n^0_{ab} != δ_ab`.
    Vacuum { row: usize, col: usize, value: i64 },
    /// `n^ρ̄_{ab} != n^ρ_{ba}`.
    Transpose { sector: usize, row: usize, col: usize },
    /// `(n^σ n^ρ)_{ab} != Σ_τ N^τ_{σρ} n^τ_{ab}`.
    Representation { sigma: usize, rho: usize, row: usize, col: usize, lhs: i64, rhs: i64 },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NimrepReport {
    pub violations: Vec<NimrepViolation>,
    /// Number of failing index tuples per violation, same order.
    pub counts: Vec<usize>,
}

impl NimrepReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn realizability(&self) -> &'static str {
        REALIZABILITY
    }

    fn record(&mut self, slot: &mut Option<usize>, v: NimrepViolation) {
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

/// Exact check of the nimrep conditions against `fr`.
pub fn verify(nr: &Nimrep, fr: &FusionRing) -> NimrepReport {
    let mut report = NimrepReport::default();
    let n = fr.len();
    if nr.sectors() != n {
        report.violations.push(NimrepViolation::SectorCount {
            expected: n,
            found: nr.sectors(),
        });
        report.counts.push(1);
        return report;
    }
    let m = nr.size();
    let (mut neg, mut vac, mut tr, mut rep) = (None, None, None, None);
    for (rho, a) in nr.mats.iter().enumerate() {
        for i in 0..m {
            for j in 0..m {
                let v = a.get(i, j);
                if v < 0 {
                    report.record(&mut neg, NimrepViolation::Negative { sector: rho, row: i, col: j, value: v });
                }
                if rho == 0 && v != i64::from(i == j) {
                    report.record(&mut vac, NimrepViolation::Vacuum { row: i, col: j, value: v });
                }
                if nr.mats[fr.conj()[rho]].get(i, j) != a.get(j, i) {
                    report.record(&mut tr, NimrepViolation::Transpose { sector: rho, row: i, col: j });
                }
            }
        }
    }
    for sigma in 0..n {
        for rho in 0..n {
            let lhs = nr.mats[sigma].mul(&nr.mats[rho]);
            let mut rhs = IntMatrix::zeros(m);
            for (tau, c) in fr.product(sigma, rho) {
                rhs.add_scaled(c, &nr.mats[tau]);
            }
            for i in 0..m {
                for j in 0..m {
                    if lhs.get(i, j) != rhs.get(i, j) {
                        report.record(
                            &mut rep,
                            NimrepViolation::Representation {
                                sigma,
                                rho,
                                row: i,
                                col: j,
                                lhs: lhs.get(i, j),
                                rhs: rhs.get(i, j),
                            },
                        );
                    }
                }
            }
        }
    }
    report
}

/// Full SU(2)_k nimrep generated by `g = n^1` through
/// `n^{a+1} = n^a g - n^{a-1}`.
///
/// The recursion must stay non-negative up to `a = k` and terminate,
/// `n^k g = n^{k-1}`, which is the fusion rule `1 × k = k - 1`.
pub fn generate_from_generator(g: &IntMatrix, md: &ModularData) -> Result<Nimrep> {
    let k = md
        .su2_level()
        .ok_or_else(|| Error::NotSu2(md.name().to_string()))? as usize;
    let m = g.n();
    if m == 0 {
        return Err(Error::InvalidGenerator("empty matrix".into()));
    }
    if !g.is_symmetric() {
        return Err(Error::InvalidGenerator("not symmetric".into()));
    }
    if let Some((i, j, v)) = g.first_negative() {
        return Err(Error::InvalidGenerator(format!("entry ({i},{j}) = {v} is negative")));
    }
    if !g.is_connected() {
        return Err(Error::InvalidGenerator("graph is not connected".into()));
    }
    let radius = g.spectral_radius();
    if radius >= 2.0 - 1e-12 {
        return Err(Error::SpectralRadiusTooLarge { radius });
    }
    let mut mats = vec![IntMatrix::identity(m), g.clone()];
    for a in 1..=k {
        let next = mats[a].mul(g).sub(&mats[a - 1]);
        if a == k {
            if next != IntMatrix::zeros(m) {
                return Err(Error::InvalidGenerator(format!(
                    "recursion does not terminate at level {k}: n^{k} G != n^{}",
                    k - 1
                )));
            }
            break;
        }
        if let Some((row, col, value)) = next.first_negative() {
            return Err(Error::NegativityFailure {
                sector: a + 1,
                row,
                col,
                value,
            });
        }
        mats.push(next);
    }
    mats.truncate(k + 1);
    let labels = (0..m).map(|i| i.to_string()).collect();
    let mut nr = Nimrep::new(labels, mats)?;
    nr.name = graph_name(g);
    Ok(nr)
}

#[derive(Clone, Copy, Debug)]
pub struct EnumerationOptions {
    pub node_budget: u64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

pub fn enumerate_su2_nimreps(md: &ModularData, m: usize) -> Result<Vec<Nimrep>> {
    enumerate_su2_nimreps_with(md, m, EnumerationOptions::default())
}

/// All SU(2)_k nimreps on `m` boundary labels up to relabeling, in
/// canonical generator order.
///
/// Generators are connected graphs whose spectral radius is exactly
/// `2 cos(π/(k+2))`; candidates within `1e-9` in double precision are
/// confirmed by evaluating the exact characteristic polynomial.
pub fn enumerate_su2_nimreps_with(
    md: &ModularData,
    m: usize,
    options: EnumerationOptions,
) -> Result<Vec<Nimrep>> {
    let k = md
        .su2_level()
        .ok_or_else(|| Error::NotSu2(md.name().to_string()))?;
    if !(1..=30).contains(&m) {
        return Err(Error::InvalidGenerator(format!("size {m} is outside 1..=30")));
    }
    let precision = md.precision();
    let mut x0 = precision.pi();
    x0 /= k + 2;
    let x0 = Float::with_val(precision.bits(), x0.cos()) * 2u32;
    let r = x0.to_f64();
    let fr = verlinde(md)?;
    let confirm = precision.pow10(-20);
    let mut out = Vec::new();
    for g in connected_graphs(m, r, options.node_budget)? {
        if (g.spectral_radius() - r).abs() > 1e-9 {
            continue;
        }
        if eval_poly(&g.charpoly(), &x0).abs() >= confirm {
            continue;
        }
        let Ok(nr) = generate_from_generator(&g, md) else {
            continue;
        };
        if verify(&nr, &fr).passed() {
            out.push(nr);
        }
    }
    Ok(out)
}

/// Canonical form of a nimrep's generator `n^1`, for comparing nimreps up
/// to relabeling.
pub fn canonical_generator(nr: &Nimrep) -> Option<IntMatrix> {
    nr.mats.get(1).map(|g| canonical_form(g).0)
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    /// `(sector, relative residual, passed)` for every sector.
    pub sectors: Vec<(usize, f64, bool)>,
}

impl SpectrumReport {
    pub fn passed(&self) -> bool {
        self.sectors.iter().all(|s| s.2)
    }

    pub fn worst_residual(&self) -> f64 {
        self.sectors.iter().fold(0.0, |a, s| a.max(s.1))
    }
}

/// Ratios `S_ρλ / S_0λ`.
fn eigen_ratio(md: &ModularData, rho: usize, lambda: usize) -> Complex {
    let s = md.s();
    Complex::with_val(s.bits(), &s[(rho, lambda)] / &s[(0, lambda)])
}

/// Compare the spectrum of every `n^ρ` with `{S_ρλ/S_0λ : λ ∈ Exp(Z)}`.
///
/// Eigenvalue multisets are compared through characteristic polynomials:
/// the exact integer polynomial of `n^ρ` against the expansion of
/// `Π_λ (x - S_ρλ/S_0λ)`, coefficient by coefficient with relative residual.
pub fn spectrum_match(nr: &Nimrep, z: &ModularInvariant, md: &ModularData) -> Result<SpectrumReport> {
    if nr.size() != z.trace() {
        return Err(Error::SizeMismatch {
            labels: nr.size(),
            trace: z.trace(),
        });
    }
    if nr.sectors() != md.len() {
        return Err(Error::InvalidNimrep(format!(
            "{} sector matrices for a model with {} sectors",
            nr.sectors(),
            md.len()
        )));
    }
    let bits = md.s().bits();
    let sectors = (0..md.len())
        .map(|rho| {
            let exact = nr.mats[rho].charpoly();
            let mut expected = vec![Complex::with_val(bits, 1)];
            for &lambda in z.exponents() {
                let e = eigen_ratio(md, rho, lambda);
                let mut next = vec![Complex::new(bits); expected.len() + 1];
                for (i, c) in expected.iter().enumerate() {
                    next[i] += c;
                    next[i + 1] -= Complex::with_val(bits, c * &e);
                }
                expected = next;
            }
            let mut worst = 0.0f64;
            for (c, e) in exact.iter().zip(&expected) {
                let diff = Complex::with_val(bits, e - bigint_to_float(c, bits));
                let scale = cabs(e).to_f64().max(1.0);
                worst = worst.max(cabs(&diff).to_f64() / scale);
            }
            (rho, worst, worst < SPECTRUM_TOLERANCE)
        })
        .collect();
    Ok(SpectrumReport { sectors })
}

/// Boundary-state coefficients: simultaneous orthonormal eigenvectors of
/// all `n^ρ`, one column per exponent.
#[derive(Clone, Debug)]
pub struct PsiMatrix {
    psi: CMatrix,
    exponents: Vec<usize>,
    unitarity_residual: f64,
    cardy_residual: f64,
}

impl PsiMatrix {
    /// `|X| × |Exp|` matrix; column `i` belongs to `exponents()[i]`.
    pub fn psi(&self) -> &CMatrix {
        &self.psi
    }

    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.unitarity_residual
    }

    /// `max |n^ρ_ab - Σ_λ ψ_aλ ψ̄_bλ S_ρλ/S_0λ|`.
    pub fn cardy_residual(&self) -> f64 {
        self.cardy_residual
    }
}

/// Diagonalize the nimrep against `Exp(Z)`.
///
/// A generic real combination `Σ_ρ w_ρ n^ρ` separates all exponents, so
/// each eigenvector is the kernel of one matrix. Columns are normalized and
/// their phase fixed by making the first entry of largest modulus real and
/// positive, so the Perron column is entrywise positive.
pub fn psi_matrix(nr: &Nimrep, z: &ModularInvariant, md: &ModularData) -> Result<PsiMatrix> {
    let (sector, multiplicity) = z.max_multiplicity();
    if multiplicity > 1 {
        return Err(Error::DegenerateExponents {
            sector,
            multiplicity,
        });
    }
    let report = spectrum_match(nr, z, md)?;
    if !report.passed() {
        return Err(Error::SpectrumMismatch(format!(
            "worst characteristic-polynomial residual {:e}",
            report.worst_residual()
        )));
    }
    let precision = md.precision();
    let bits = precision.bits();
    let m = nr.size();
    let n = md.len();
    let weights: Vec<Float> = (0..n)
        .map(|rho| Float::with_val(bits, rho as u32 + 2).sqrt() / (rho as u32 + 1))
        .collect();
    let mut generic = CMatrix::zeros(m, m, precision);
    for (rho, w) in weights.iter().enumerate() {
        for a in 0..m {
            for b in 0..m {
                let v = nr.mats[rho].get(a, b);
                if v != 0 {
                    generic[(a, b)] += Complex::with_val(bits, w * v);
                }
            }
        }
    }
    let exps = z.exponents();
    let mut psi = CMatrix::zeros(m, exps.len(), precision);
    for (col, &lambda) in exps.iter().enumerate() {
        let mut mu = Complex::new(bits);
        for (rho, w) in weights.iter().enumerate() {
            mu += eigen_ratio(md, rho, lambda) * w;
        }
        let mut shifted = generic.clone();
        for a in 0..m {
            shifted[(a, a)] -= &mu;
        }
        let kernel = null_space(&shifted, &precision.tolerance());
        if kernel.len() != 1 {
            return Err(Error::SpectrumMismatch(format!(
                "eigenspace of exponent {lambda} has dimension {}",
                kernel.len()
            )));
        }
        let v = normalize_column(&kernel[0], precision);
        for (a, x) in v.into_iter().enumerate() {
            psi[(a, col)] = x;
        }
    }
    let unitarity_residual = psi
        .adjoint()
        .mul(&psi)
        .max_abs_diff(&CMatrix::identity(exps.len(), precision))
        .to_f64();
    let mut cardy_residual = 0.0f64;
    for (rho, mat) in nr.mats.iter().enumerate() {
        let ratios: Vec<Complex> = exps.iter().map(|&l| eigen_ratio(md, rho, l)).collect();
        let rebuilt = psi.scale_columns(&ratios).mul(&psi.adjoint());
        for a in 0..m {
            for b in 0..m {
                let d = Complex::with_val(bits, &rebuilt[(a, b)] - mat.get(a, b));
                cardy_residual = cardy_residual.max(cabs(&d).to_f64());
            }
        }
    }
    if unitarity_residual > CARDY_TOLERANCE || cardy_residual > CARDY_TOLERANCE {
        return Err(Error::SpectrumMismatch(format!(
            "unitarity residual {unitarity_residual:e}, Cardy-Verlinde residual {cardy_residual:e}"
        )));
    }
    Ok(PsiMatrix {
        psi,
        exponents: exps.to_vec(),
        unitarity_residual,
        cardy_residual,
    })
}

fn normalize_column(v: &[Complex], precision: Precision) -> Vec<Complex> {
    let bits = precision.bits();
    let mut norm = Float::new(bits);
    for x in v {
        norm += Float::with_val(bits, x.abs_ref()).square();
    }
    let norm = norm.sqrt();
    let moduli: Vec<Float> = v.iter().map(cabs).collect();
    let max = moduli.iter().max_by(|a, b| a.total_cmp(b)).cloned().unwrap_or_else(|| Float::new(bits));
    let slack = Float::with_val(bits, &max * &precision.tolerance());
    let lead = moduli
        .iter()
        .position(|x| Float::with_val(bits, x + &slack) >= max)
        .unwrap_or(0);
    // Multiply by conj(v_lead) / (|v_lead| · norm).
    let mut phase = Complex::with_val(bits, v[lead].conj_ref());
    phase /= Float::with_val(bits, &moduli[lead] * &norm);
    v.iter().map(|x| Complex::with_val(bits, x * &phase)).collect()
}
