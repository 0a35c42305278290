//! Boundary data assembled from a modular invariant and a nimrep: annulus
//! spectra, the open/closed channel (heat-kernel) identity and index
//! bookkeeping for chiral extensions.
//!
//! Channel dictionary, fixed here once: the open channel is evaluated at
//! `q = e^{-β}` and the closed channel at `q̃ = e^{-4π²/β}`, so that
//! `χ_λ(q̃) = Σ_ρ S_λρ χ_ρ(q)`.

use num_bigint::BigInt;
use num_rational::Rational64;
use rayon::prelude::*;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::characters::{characters, check_beta, nomes, s_transform_residual_with, tail_bound, ChannelResidual, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::fusion::verlinde;
use crate::intmat::IntMatrix;
use crate::invariants::ModularInvariant;
use crate::modular_data::{ModelFamily, ModularData, FORMAT_VERSION};
use crate::nimreps::{psi_matrix, spectrum_match, verify, Nimrep, PsiMatrix, REALIZABILITY, SPECTRUM_TOLERANCE, CARDY_TOLERANCE};
use crate::numeric::{cabs, format_float, format_rational, Precision};
use crate::qseries::QSeries;

/// Sector content and partition function of the strip with boundary
/// conditions `a` and `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnulusSpectrum {
    pub a: usize,
    pub b: usize,
    /// `n^ρ_ab` for every sector `ρ`.
    pub multiplicities: Vec<i64>,
    /// `Z_ab = Σ_ρ n^ρ_ab χ_ρ`.
    pub z_ab: QSeries,
    pub vacuum_present: bool,
}

/// Annulus spectrum from precomputed characters (one per sector).
pub fn annulus_from_characters(nr: &Nimrep, chars: &[QSeries], a: usize, b: usize) -> Result<AnnulusSpectrum> {
    for x in [a, b] {
        if x >= nr.size() {
            return Err(Error::UnknownLabel(x.to_string()));
        }
    }
    if chars.len() != nr.sectors() {
        return Err(Error::InvalidNimrep(format!(
            "{} characters for {} sectors",
            chars.len(),
            nr.sectors()
        )));
    }
    let multiplicities: Vec<i64> = nr.mats().iter().map(|m| m.get(a, b)).collect();
    let mut z: Option<QSeries> = None;
    for (mult, chi) in multiplicities.iter().zip(chars) {
        if *mult == 0 {
            continue;
        }
        let term = chi.scale(&BigInt::from(*mult));
        z = Some(match z {
            None => term,
            Some(acc) => acc.add(&term)?,
        });
    }
    let z_ab = match z {
        Some(z) => z.compact(),
        // No sector propagates; the zero series on the vacuum's lattice.
        None => chars[0].scale(&BigInt::from(0)),
    };
    Ok(AnnulusSpectrum {
        a,
        b,
        vacuum_present: multiplicities[0] > 0,
        multiplicities,
        z_ab,
    })
}

/// Annulus spectrum between boundary labels `a` and `b` through `order`.
pub fn annulus(nr: &Nimrep, md: &ModularData, a: &str, b: &str, order: usize) -> Result<AnnulusSpectrum> {
    let (a, b) = (nr.resolve_label(a)?, nr.resolve_label(b)?);
    let chars = characters(md, order)?;
    annulus_from_characters(nr, &chars, a, b)
}

/// Both channels of the annulus amplitude, evaluated once and reused for
/// every boundary pair.
struct Channels {
    precision: Precision,
    open: Vec<Float>,
    closed: Vec<Float>,
    open_tail: Vec<f64>,
    closed_tail: Vec<f64>,
}

impl Channels {
    fn new(md: &ModularData, beta: f64, order: usize) -> Result<Self> {
        check_beta(beta)?;
        let precision = md.precision();
        let chars = characters(md, order)?;
        let (q, qt) = nomes(beta, precision);
        let n = md.len();
        Ok(Channels {
            precision,
            open: chars.par_iter().map(|c| c.eval(&q, precision)).collect(),
            closed: chars.par_iter().map(|c| c.eval(&qt, precision)).collect(),
            open_tail: (0..n).map(|r| tail_bound(md, r, order, q.to_f64())).collect(),
            closed_tail: (0..n).map(|r| tail_bound(md, r, order, qt.to_f64())).collect(),
        })
    }

    /// `|Σ_ρ n^ρ_ab χ_ρ(q) - Σ_λ ψ_aλ ψ̄_bλ χ_λ(q̃) / S_0λ|`.
    fn pair(&self, nr: &Nimrep, psi: &PsiMatrix, md: &ModularData, a: usize, b: usize, tolerance: f64) -> ChannelResidual {
        let bits = self.precision.bits();
        let mut open = Complex::new(bits);
        let mut tail = 0.0f64;
        for (rho, m) in nr.mats().iter().enumerate() {
            let v = m.get(a, b);
            if v != 0 {
                open += Float::with_val(bits, &self.open[rho] * v);
                tail += v as f64 * self.open_tail[rho];
            }
        }
        let mut closed = Complex::new(bits);
        let p = psi.psi();
        for (col, &lambda) in psi.exponents().iter().enumerate() {
            let conj_b = Complex::with_val(bits, p[(b, col)].conj_ref());
            let mut w = Complex::with_val(bits, &p[(a, col)] * &conj_b);
            w /= &md.s()[(0, lambda)];
            tail += cabs(&w).to_f64() * self.closed_tail[lambda];
            closed += w * &self.closed[lambda];
        }
        let diff = Complex::with_val(bits, &open - &closed);
        ChannelResidual {
            numeric: cabs(&diff).to_f64(),
            tail_bound: tail,
            tolerance,
        }
    }
}

fn warn_if_truncated(r: ChannelResidual) -> Result<ChannelResidual> {
    if r.tail_bound >= r.tolerance {
        return Err(Error::ConvergenceWarning {
            tail_bound: r.tail_bound,
            tolerance: r.tolerance,
        });
    }
    Ok(r)
}

/// Open channel `Z_ab(e^{-β})` against the closed-channel heat-kernel
/// matrix element `Σ_λ ψ_aλ ψ̄_bλ χ_λ(e^{-4π²/β}) / S_0λ`.
pub fn heat_kernel_check(
    nr: &Nimrep,
    z: &ModularInvariant,
    md: &ModularData,
    a: usize,
    b: usize,
    beta: f64,
    order: usize,
) -> Result<ChannelResidual> {
    if a >= nr.size() || b >= nr.size() {
        return Err(Error::UnknownLabel(a.max(b).to_string()));
    }
    let psi = psi_matrix(nr, z, md)?;
    let channels = Channels::new(md, beta, order)?;
    warn_if_truncated(channels.pair(nr, &psi, md, a, b, DEFAULT_TOLERANCE))
}

/// [`heat_kernel_check`] for every ordered boundary pair, row-major.
pub fn heat_kernel_all_pairs(
    nr: &Nimrep,
    z: &ModularInvariant,
    md: &ModularData,
    beta: f64,
    order: usize,
) -> Result<Vec<((usize, usize), ChannelResidual)>> {
    let psi = psi_matrix(nr, z, md)?;
    let channels = Channels::new(md, beta, order)?;
    let m = nr.size();
    (0..m * m)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / m, k % m);
            warn_if_truncated(channels.pair(nr, &psi, md, a, b, DEFAULT_TOLERANCE)).map(|r| ((a, b), r))
        })
        .collect()
}

/// Index data of a chiral extension with `θ = ⊕ m_ρ ρ`.
#[derive(Clone, Debug)]
pub struct IndexReport {
    pub theta_mult: Vec<i64>,
    /// `d(π) = Σ m_ρ d_ρ`.
    pub d_pi: Float,
    /// `μ = Σ d_ρ²`.
    pub mu: Float,
    /// `d(π)² μ`.
    pub two_interval: Float,
    pub c8_index: Float,
}

pub fn index_report(md: &ModularData, theta_mult: &[i64]) -> Result<IndexReport> {
    if theta_mult.len() != md.len() {
        return Err(Error::InvalidTheta(format!(
            "{} multiplicities for {} sectors",
            theta_mult.len(),
            md.len()
        )));
    }
    if let Some((rho, m)) = theta_mult.iter().enumerate().find(|(_, m)| **m < 0) {
        return Err(Error::InvalidTheta(format!("m_{rho} = {m} is negative")));
    }
    if theta_mult[0] == 0 {
        return Err(Error::InvalidTheta("θ must contain the vacuum (m_0 >= 1)".into()));
    }
    let bits = md.precision().bits();
    let dims = md.quantum_dims();
    let mut d_pi = Float::new(bits);
    for (m, d) in theta_mult.iter().zip(&dims) {
        d_pi += Float::with_val(bits, d * *m);
    }
    let mu = md.global_index();
    let two_interval = Float::with_val(bits, d_pi.square_ref()) * &mu;
    Ok(IndexReport {
        theta_mult: theta_mult.to_vec(),
        d_pi,
        c8_index: mu.clone(),
        mu,
        two_interval,
    })
}

/// Parse `"label:mult,label:mult,..."`; labels are sector names or indices
/// and unspecified sectors get multiplicity 0.
pub fn parse_theta(md: &ModularData, text: &str) -> Result<Vec<i64>> {
    let mut mult = vec![0i64; md.len()];
    for item in split_top_level(text).into_iter().map(str::trim).filter(|s| !s.is_empty()) {
        let (label, m) = item
            .rsplit_once(':')
            .ok_or_else(|| Error::InvalidTheta(format!("{item:?} is not label:multiplicity")))?;
        let rho = md.resolve_sector(label.trim())?;
        let m: i64 = m
            .trim()
            .parse()
            .map_err(|_| Error::InvalidTheta(format!("multiplicity {m:?} is not an integer")))?;
        mult[rho] += m;
    }
    Ok(mult)
}

/// Split on commas outside parentheses, so `(1,2):1,(1,1):1` has two items.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

/// A number together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Quantity {
    ExactInteger { value: String },
    ExactRational { value: String },
    Float { value: String, digits: u32 },
    ExactIntegerList { values: Vec<String> },
    ExactIntegerMatrix { rows: Vec<Vec<i64>> },
}

impl Quantity {
    pub fn int(v: impl ToString) -> Self {
        Quantity::ExactInteger { value: v.to_string() }
    }

    pub fn rational(r: Rational64) -> Self {
        Quantity::ExactRational {
            value: format_rational(r),
        }
    }

    pub fn float(x: &Float, precision: Precision) -> Self {
        Quantity::Float {
            value: format_float(x, precision.digits() as usize),
            digits: precision.digits(),
        }
    }

    /// A double-precision diagnostic (residuals, tolerances).
    pub fn double(x: f64) -> Self {
        Quantity::Float {
            value: format!("{x:.6e}"),
            digits: 7,
        }
    }

    pub fn matrix(m: &IntMatrix) -> Self {
        Quantity::ExactIntegerMatrix { rows: m.rows() }
    }

    pub fn list<T: ToString>(values: &[T]) -> Self {
        Quantity::ExactIntegerList {
            values: values.iter().map(ToString::to_string).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub passed: bool,
    pub residual: Quantity,
    pub tolerance: Quantity,
}

impl Check {
    fn new(residual: f64, tolerance: f64) -> Self {
        Check {
            passed: residual < tolerance,
            residual: Quantity::double(residual),
            tolerance: Quantity::double(tolerance),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorSummary {
    pub name: String,
    pub h: Quantity,
    pub quantum_dimension: Quantity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub family: String,
    pub central_charge: Quantity,
    pub global_index: Quantity,
    pub sectors: Vec<SectorSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantSummary {
    pub tag: String,
    pub z: Quantity,
    pub exponents: Quantity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NimrepSummary {
    pub name: Option<String>,
    pub labels: Vec<String>,
    pub verified: bool,
    pub violations: Vec<String>,
    pub realizability: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum PsiSummary {
    Computed {
        exponents: Quantity,
        /// Rows of `[re, im]` decimal pairs.
        matrix: Vec<Vec<[String; 2]>>,
        digits: u32,
        unitarity: Check,
        cardy_verlinde: Check,
    },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnulusSummary {
    pub a: String,
    pub b: String,
    pub multiplicities: Quantity,
    pub vacuum_present: bool,
    /// Absent when the model has no built-in characters.
    pub series: Option<SeriesSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub offset: Quantity,
    pub grid: u32,
    pub coefficients: Quantity,
}

impl SeriesSummary {
    pub fn new(s: &QSeries) -> Self {
        SeriesSummary {
            offset: Quantity::rational(s.offset()),
            grid: s.grid(),
            coefficients: Quantity::list(s.coeffs()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCheck {
    pub a: String,
    pub b: String,
    pub check: Check,
    pub tail_bound: Quantity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ChannelSummary {
    Computed { check: Check, tail_bound: Quantity },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum HeatKernelSummary {
    Computed { pairs: Vec<PairCheck> },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSummary {
    pub boundary: String,
    pub theta: Quantity,
    pub d_pi: Quantity,
    pub mu: Quantity,
    pub two_interval: Quantity,
    pub c8_index: Quantity,
}

impl IndexSummary {
    pub fn new(boundary: &str, r: &IndexReport, precision: Precision) -> Self {
        IndexSummary {
            boundary: boundary.to_string(),
            theta: Quantity::list(&r.theta_mult),
            d_pi: Quantity::float(&r.d_pi, precision),
            mu: Quantity::float(&r.mu, precision),
            two_interval: Quantity::float(&r.two_interval, precision),
            c8_index: Quantity::float(&r.c8_index, precision),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub precision: u32,
    pub order: usize,
    pub beta: Quantity,
}

/// Everything known about one (model, invariant, nimrep) triple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullReport {
    pub format_version: u32,
    pub settings: ReportSettings,
    pub model: ModelSummary,
    pub invariant: InvariantSummary,
    pub nimrep: NimrepSummary,
    pub spectrum_match: Check,
    pub psi: PsiSummary,
    pub annulus: Vec<AnnulusSummary>,
    pub heat_kernel: HeatKernelSummary,
    pub s_transform: ChannelSummary,
    pub indices: Vec<IndexSummary>,
    pub all_passed: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    pub order: usize,
    pub beta: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            order: 400,
            beta: 2.0 * std::f64::consts::PI,
        }
    }
}

pub fn family_name(md: &ModularData) -> String {
    match md.family() {
        ModelFamily::Su2 { level } => format!("su2 level {level}"),
        ModelFamily::Minimal { p, p_prime, .. } => format!("minimal p={p} p'={p_prime}"),
        ModelFamily::Custom => "custom".into(),
    }
}

pub fn model_summary(md: &ModularData) -> ModelSummary {
    let precision = md.precision();
    let dims = md.quantum_dims();
    ModelSummary {
        name: md.name().to_string(),
        family: family_name(md),
        central_charge: Quantity::rational(md.central_charge()),
        global_index: Quantity::float(&md.global_index(), precision),
        sectors: md
            .sectors()
            .iter()
            .zip(md.weights())
            .zip(&dims)
            .map(|((s, h), d)| SectorSummary {
                name: s.name.clone(),
                h: Quantity::rational(*h),
                quantum_dimension: Quantity::float(d, precision),
            })
            .collect(),
    }
}

pub fn psi_summary(psi: &PsiMatrix, precision: Precision) -> PsiSummary {
    let digits = precision.digits() as usize;
    let p = psi.psi();
    PsiSummary::Computed {
        exponents: Quantity::list(psi.exponents()),
        matrix: (0..p.rows())
            .map(|a| {
                (0..p.cols())
                    .map(|l| [format_float(p[(a, l)].real(), digits), format_float(p[(a, l)].imag(), digits)])
                    .collect()
            })
            .collect(),
        digits: precision.digits(),
        unitarity: Check::new(psi.unitarity_residual(), CARDY_TOLERANCE),
        cardy_verlinde: Check::new(psi.cardy_residual(), CARDY_TOLERANCE),
    }
}

/// Assemble the full report. Checks that cannot run (degenerate exponents,
/// models without characters) are recorded as skipped with the reason.
pub fn full_report(md: &ModularData, z: &ModularInvariant, nr: &Nimrep, options: ReportOptions) -> Result<FullReport> {
    let precision = md.precision();
    let fr = verlinde(md)?;
    let verification = verify(nr, &fr);
    let spectrum = spectrum_match(nr, z, md)?;
    let labels = nr.labels();

    let psi = if verification.passed() && spectrum.passed() {
        psi_matrix(nr, z, md)
    } else {
        Err(Error::SpectrumMismatch("nimrep failed verification or spectrum match".into()))
    };

    let chars = match characters(md, options.order) {
        Ok(c) => Some(c),
        Err(Error::CharactersUnavailable(_)) => None,
        Err(e) => return Err(e),
    };
    let m = nr.size();
    let mut annulus = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            let multiplicities: Vec<i64> = nr.mats().iter().map(|x| x.get(a, b)).collect();
            let series = match &chars {
                Some(c) => Some(SeriesSummary::new(&annulus_from_characters(nr, c, a, b)?.z_ab)),
                None => None,
            };
            annulus.push(AnnulusSummary {
                a: labels[a].clone(),
                b: labels[b].clone(),
                vacuum_present: multiplicities[0] > 0,
                multiplicities: Quantity::list(&multiplicities),
                series,
            });
        }
    }

    let heat_kernel = match (&psi, &chars) {
        (Err(e), _) => HeatKernelSummary::Skipped { reason: e.to_string() },
        (_, None) => HeatKernelSummary::Skipped {
            reason: Error::CharactersUnavailable(md.name().to_string()).to_string(),
        },
        (Ok(_), Some(_)) => match heat_kernel_all_pairs(nr, z, md, options.beta, options.order) {
            Ok(pairs) => HeatKernelSummary::Computed {
                pairs: pairs
                    .into_iter()
                    .map(|((a, b), r)| PairCheck {
                        a: labels[a].clone(),
                        b: labels[b].clone(),
                        check: Check::new(r.residual(), r.tolerance),
                        tail_bound: Quantity::double(r.tail_bound),
                    })
                    .collect(),
            },
            Err(e) => HeatKernelSummary::Skipped { reason: e.to_string() },
        },
    };

    let s_transform = match s_transform_residual_with(md, options.order, options.beta, DEFAULT_TOLERANCE) {
        Ok(r) => ChannelSummary::Computed {
            check: Check::new(r.residual(), r.tolerance),
            tail_bound: Quantity::double(r.tail_bound),
        },
        Err(e) => ChannelSummary::Skipped { reason: e.to_string() },
    };

    let mut indices = Vec::with_capacity(m);
    for (a, label) in labels.iter().enumerate() {
        let theta: Vec<i64> = nr.mats().iter().map(|x| x.get(a, a)).collect();
        if let Ok(r) = index_report(md, &theta) {
            indices.push(IndexSummary::new(label, &r, precision));
        }
    }

    let psi_summary = match &psi {
        Ok(p) => psi_summary(p, precision),
        Err(e) => PsiSummary::Skipped { reason: e.to_string() },
    };
    let spectrum_check = Check::new(spectrum.worst_residual(), SPECTRUM_TOLERANCE);
    let mut all_passed = verification.passed() && spectrum_check.passed;
    if let PsiSummary::Computed { unitarity, cardy_verlinde, .. } = &psi_summary {
        all_passed &= unitarity.passed && cardy_verlinde.passed;
    }
    if let HeatKernelSummary::Computed { pairs } = &heat_kernel {
        all_passed &= pairs.iter().all(|p| p.check.passed);
    }
    if let ChannelSummary::Computed { check, .. } = &s_transform {
        all_passed &= check.passed;
    }

    Ok(FullReport {
        format_version: FORMAT_VERSION,
        settings: ReportSettings {
            precision: precision.digits(),
            order: options.order,
            beta: Quantity::double(options.beta),
        },
        model: model_summary(md),
        invariant: InvariantSummary {
            tag: z.tag().to_string(),
            z: Quantity::matrix(z.z()),
            exponents: Quantity::list(z.exponents()),
        },
        nimrep: NimrepSummary {
            name: nr.name().map(str::to_string),
            labels: labels.to_vec(),
            verified: verification.passed(),
            violations: verification.violations.iter().map(|v| format!("{v:?}")).collect(),
            realizability: REALIZABILITY.to_string(),
        },
        spectrum_match: spectrum_check,
        psi: psi_summary,
        annulus,
        heat_kernel,
        s_transform,
        indices,
        all_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{dynkin_d, dynkin_e};
    use crate::invariants::enumerate_physical;
    use crate::modular_data::{build_minimal, build_su2};
    use crate::nimreps::{generate_from_generator, regular_nimrep};

    fn ising() -> ModularData {
        build_minimal(4, 3, Precision::new(50)).unwrap()
    }

    fn diagonal(md: &ModularData) -> ModularInvariant {
        ModularInvariant::new(md, IntMatrix::identity(md.len())).unwrap()
    }

    #[test]
    fn ising_sigma_sigma_annulus() {
        let md = ising();
        let nr = regular_nimrep(&verlinde(&md).unwrap());
        let sp = annulus(&nr, &md, "2", "2", 50).unwrap();
        assert_eq!(sp.multiplicities, vec![1, 1, 0]);
        let chars = characters(&md, 50).unwrap();
        let expected = chars[0].add(&chars[1]).unwrap().compact();
        assert_eq!(sp.z_ab, expected);
        assert!(sp.vacuum_present);
    }

    #[test]
    fn vacuum_rule_and_symmetry() {
        let md = build_su2(4, Precision::new(50)).unwrap();
        let d4 = generate_from_generator(&dynkin_d(4), &md).unwrap();
        let chars = characters(&md, 40).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let sp = annulus_from_characters(&d4, &chars, a, b).unwrap();
                assert_eq!(sp.vacuum_present, a == b);
                assert_eq!(sp.multiplicities[0], i64::from(a == b));
                assert!(sp.z_ab.is_nonnegative());
                let back = annulus_from_characters(&d4, &chars, b, a).unwrap();
                assert_eq!(sp.z_ab, back.z_ab);
            }
        }
    }

    #[test]
    fn heat_kernel_ising_and_e6() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let md = ising();
        let nr = regular_nimrep(&verlinde(&md).unwrap());
        let r = heat_kernel_check(&nr, &diagonal(&md), &md, 0, 0, two_pi, 400).unwrap();
        assert!(r.residual() < 1e-8, "{r:?}");

        let md = build_su2(10, Precision::new(50)).unwrap();
        let e6z = enumerate_physical(&md).unwrap().into_iter().find(|z| z.tag() == "E6").unwrap();
        let e6 = generate_from_generator(&dynkin_e(6), &md).unwrap();
        let all = heat_kernel_all_pairs(&e6, &e6z, &md, two_pi, 400).unwrap();
        assert_eq!(all.len(), 36);
        assert!(all.iter().all(|(_, r)| r.residual() < 1e-8));
    }

    #[test]
    fn ising_index_chain() {
        let md = ising();
        let theta = parse_theta(&md, "0:1,1:1").unwrap();
        let r = index_report(&md, &theta).unwrap();
        for (x, v) in [(&r.d_pi, 2.0), (&r.mu, 4.0), (&r.two_interval, 16.0), (&r.c8_index, 4.0)] {
            assert!((x.to_f64() - v).abs() < 1e-12);
        }
        let trivial = index_report(&md, &[1, 0, 0]).unwrap();
        assert!((trivial.two_interval.to_f64() - trivial.mu.to_f64()).abs() < 1e-12);
        assert!(matches!(index_report(&md, &[0, 1, 0]), Err(Error::InvalidTheta(_))));
        assert!(matches!(parse_theta(&md, "0:x"), Err(Error::InvalidTheta(_))));
        assert!(matches!(parse_theta(&md, "(9,9):1"), Err(Error::UnknownLabel(_))));
        assert_eq!(parse_theta(&md, "(1,1):1, (2,1):1").unwrap(), theta);
        let su2 = build_su2(1, Precision::new(50)).unwrap();
        let r = index_report(&su2, &[1, 0]).unwrap();
        assert!((r.mu.to_f64() - 2.0).abs() < 1e-12 && (r.two_interval.to_f64() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn full_reports() {
        let md = ising();
        let nr = regular_nimrep(&verlinde(&md).unwrap());
        let rep = full_report(&md, &diagonal(&md), &nr, ReportOptions::default()).unwrap();
        assert_eq!(rep.annulus.len(), 9);
        assert!(rep.all_passed);

        let md4 = build_su2(4, Precision::new(50)).unwrap();
        let d4z = enumerate_physical(&md4).unwrap().into_iter().find(|z| z.tag() == "D4").unwrap();
        let d4 = generate_from_generator(&dynkin_d(4), &md4).unwrap();
        let rep = full_report(&md4, &d4z, &d4, ReportOptions::default()).unwrap();
        assert_eq!(rep.nimrep.labels.len(), 4);
        match &rep.psi {
            PsiSummary::Skipped { reason } => assert!(reason.contains("occurs 2 times")),
            other => panic!("expected skipped psi, got {other:?}"),
        }
        assert!(matches!(rep.heat_kernel, HeatKernelSummary::Skipped { .. }));
    }

    #[test]
    fn cardy_case_matches_fusion() {
        let md = build_su2(5, Precision::new(50)).unwrap();
        let fr = verlinde(&md).unwrap();
        let nr = regular_nimrep(&fr);
        for rho in 0..md.len() {
            for a in 0..md.len() {
                for b in 0..md.len() {
                    assert_eq!(nr.mat(rho).get(a, b), fr.get(rho, fr.conj()[a], b));
                }
            }
        }
    }
}
