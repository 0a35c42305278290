//! Modular data of rational chiral theories: sectors, conformal weights,
//! central charge and the S and T matrices.
//!
//! Conventions: `T_ρ = exp(2πi(h_ρ - c/24))`, `S` symmetric and unitary with
//! `S² = C` (charge conjugation) and `(ST)³ = S²`. The Perron row of `S` is
//! the row of the sector of lowest conformal weight; for unitary models this
//! is the vacuum row `S_0ρ`.

use num_integer::Integer;
use num_rational::Rational64;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{cabs, format_rational, parse_float, parse_rational, CMatrix, Precision};

/// Builders refuse to run below this many digits.
pub const MIN_BUILDER_DIGITS: u32 = 30;

/// Current version of every document written by this crate.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SectorLabel {
    pub id: usize,
    pub name: String,
}

/// Which closed-form family a model came from. Characters are only
/// available for the built-in families.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    Su2 { level: u32 },
    /// Kac labels `(r, s)` of each sector, in sector order.
    Minimal { p: u32, p_prime: u32, kac: Vec<(u32, u32)> },
    Custom,
}

/// Residuals of the defining relations, measured when the data was built.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub symmetry: f64,
    pub unitarity: f64,
    pub conjugation: f64,
    pub modular_relation: f64,
    /// Smallest entry of the Perron row.
    pub perron_min: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModularData {
    name: String,
    family: ModelFamily,
    sectors: Vec<SectorLabel>,
    central_charge: Rational64,
    weights: Vec<Rational64>,
    s: CMatrix,
    t: Vec<Complex>,
    conj: Vec<usize>,
    precision: Precision,
    perron: usize,
    report: ValidationReport,
}

impl ModularData {
    /// Assemble and validate modular data from sectors, weights and an
    /// explicit S matrix. T is derived from the weights.
    pub fn new(
        name: impl Into<String>,
        family: ModelFamily,
        names: Vec<String>,
        central_charge: Rational64,
        weights: Vec<Rational64>,
        s: CMatrix,
        precision: Precision,
    ) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidDocument("model has no sectors".into()));
        }
        if weights.len() != n || s.rows() != n || s.cols() != n {
            return Err(Error::InvalidDocument(format!(
                "{} sectors, {} weights, S is {}x{}",
                n,
                weights.len(),
                s.rows(),
                s.cols()
            )));
        }
        if weights[0] != Rational64::from_integer(0) {
            return Err(Error::MissingVacuum {
                found: format_rational(weights[0]),
            });
        }
        let sectors = names
            .into_iter()
            .enumerate()
            .map(|(id, name)| SectorLabel { id, name })
            .collect();
        let shift = central_charge / 24;
        let t = weights
            .iter()
            .map(|&h| precision.cis_turns(h - shift))
            .collect();
        // Lowest weight first, earliest index on ties.
        let perron = (0..n).min_by_key(|&i| (weights[i], i)).unwrap_or(0);
        let mut md = ModularData {
            name: name.into(),
            family,
            sectors,
            central_charge,
            weights,
            s,
            t,
            conj: (0..n).collect(),
            precision,
            perron,
            report: ValidationReport {
                symmetry: 0.0,
                unitarity: 0.0,
                conjugation: 0.0,
                modular_relation: 0.0,
                perron_min: 0.0,
            },
        };
        md.validate()?;
        Ok(md)
    }

    fn validate(&mut self) -> Result<()> {
        let tol = self.precision.tolerance();
        let n = self.len();
        let s = &self.s;

        let symmetry = s.max_abs_diff(&s.transpose());
        if symmetry > tol {
            return Err(Error::NotSymmetric {
                residual: symmetry.to_f64(),
            });
        }

        let unitarity = s
            .mul(&s.adjoint())
            .max_abs_diff(&CMatrix::identity(n, self.precision));
        if unitarity > tol {
            return Err(Error::NotUnitary {
                residual: unitarity.to_f64(),
            });
        }

        let s2 = s.mul(s);
        let mut conj = vec![usize::MAX; n];
        let mut perm = CMatrix::zeros(n, n, self.precision);
        for (i, slot) in conj.iter_mut().enumerate() {
            let j = (0..n)
                .max_by(|&a, &b| {
                    cabs(&s2[(i, a)])
                        .partial_cmp(&cabs(&s2[(i, b)]))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(0);
            *slot = j;
            perm[(i, j)] = self.precision.complex(1);
        }
        let conjugation = s2.max_abs_diff(&perm);
        let mut seen = vec![false; n];
        let is_perm = conj.iter().all(|&j| !std::mem::replace(&mut seen[j], true));
        if conjugation > tol || !is_perm || conj[0] != 0 {
            return Err(Error::ConjugationNotPermutation {
                residual: conjugation.to_f64(),
            });
        }

        let st = s.scale_columns(&self.t);
        let st3 = st.mul(&st).mul(&st);
        let modular_relation = st3.max_abs_diff(&s2);
        if modular_relation > tol {
            return Err(Error::ModularRelation {
                residual: modular_relation.to_f64(),
            });
        }

        let mut perron_min = f64::INFINITY;
        for j in 0..n {
            let z = &s[(self.perron, j)];
            let value = z.real().to_f64();
            if z.real() <= &tol || z.imag().clone().abs() > tol {
                return Err(Error::NegativePerronRow {
                    row: self.perron,
                    sector: j,
                    value,
                });
            }
            perron_min = perron_min.min(value);
        }

        self.conj = conj;
        self.report = ValidationReport {
            symmetry: symmetry.to_f64(),
            unitarity: unitarity.to_f64(),
            conjugation: conjugation.to_f64(),
            modular_relation: modular_relation.to_f64(),
            perron_min,
        };
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> &ModelFamily {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    pub fn sectors(&self) -> &[SectorLabel] {
        &self.sectors
    }

    pub fn central_charge(&self) -> Rational64 {
        self.central_charge
    }

    pub fn weights(&self) -> &[Rational64] {
        &self.weights
    }

    pub fn s(&self) -> &CMatrix {
        &self.s
    }

    pub fn t(&self) -> &[Complex] {
        &self.t
    }

    pub fn conj(&self) -> &[usize] {
        &self.conj
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Sector whose S row is strictly positive.
    pub fn perron_sector(&self) -> usize {
        self.perron
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    /// Level of an SU(2)_k model.
    pub fn su2_level(&self) -> Option<u32> {
        match self.family {
            ModelFamily::Su2 { level } => Some(level),
            _ => None,
        }
    }

    pub fn sector_by_name(&self, name: &str) -> Option<usize> {
        self.sectors.iter().position(|s| s.name == name)
    }

    /// Resolve a label given either as a sector name or a numeric index.
    pub fn resolve_sector(&self, label: &str) -> Result<usize> {
        if let Some(i) = self.sector_by_name(label) {
            return Ok(i);
        }
        match label.trim().parse::<usize>() {
            Ok(i) if i < self.len() => Ok(i),
            _ => Err(Error::UnknownLabel(label.to_string())),
        }
    }

    /// Same theory with sectors listed in a different order:
    /// new sector `i` is old sector `perm[i]`. The vacuum must stay first.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut check = perm.to_vec();
        check.sort_unstable();
        if perm.len() != n || check != (0..n).collect::<Vec<_>>() || perm[0] != 0 {
            return Err(Error::InvalidDocument(
                "relabeling must be a permutation fixing the vacuum".into(),
            ));
        }
        let family = match &self.family {
            ModelFamily::Minimal { p, p_prime, kac } => ModelFamily::Minimal {
                p: *p,
                p_prime: *p_prime,
                kac: perm.iter().map(|&i| kac[i]).collect(),
            },
            // SU(2) characters are indexed by sector position, so a
            // reordered copy no longer carries the closed form.
            ModelFamily::Su2 { .. } | ModelFamily::Custom => ModelFamily::Custom,
        };
        let s = CMatrix::from_fn(n, n, self.precision, |i, j| {
            self.s[(perm[i], perm[j])].clone()
        });
        ModularData::new(
            self.name.clone(),
            family,
            perm.iter().map(|&i| self.sectors[i].name.clone()).collect(),
            self.central_charge,
            perm.iter().map(|&i| self.weights[i]).collect(),
            s,
            self.precision,
        )
    }

    /// Quantum dimensions `d_ρ = S_ρp / S_0p` with `p` the Perron sector;
    /// equals `S_0ρ / S_00` for unitary models.
    pub fn quantum_dims(&self) -> Vec<Float> {
        let p = self.perron;
        let denom = self.s[(0, p)].real().clone();
        (0..self.len())
            .map(|rho| {
                let mut d = self.s[(rho, p)].real().clone();
                d /= &denom;
                d
            })
            .collect()
    }

    /// Global index `μ = Σ_ρ d_ρ²`.
    pub fn global_index(&self) -> Float {
        let mut mu = self.precision.real(0);
        for d in self.quantum_dims() {
            mu += d.square();
        }
        mu
    }
}

/// Quantum dimensions of all sectors.
pub fn quantum_dims(md: &ModularData) -> Vec<Float> {
    md.quantum_dims()
}

/// Global index `μ_A`.
pub fn global_index(md: &ModularData) -> Float {
    md.global_index()
}

fn check_precision(precision: Precision) -> Result<()> {
    if precision.digits() < MIN_BUILDER_DIGITS {
        return Err(Error::PrecisionTooLow {
            digits: precision.digits(),
            minimum: MIN_BUILDER_DIGITS,
        });
    }
    Ok(())
}

/// `sin(π·x)` with `x` reduced exactly modulo 2 first.
fn sin_pi(x: Rational64, precision: Precision) -> Float {
    let two = Rational64::from_integer(2);
    let reduced = x - (x / two).floor() * two;
    let mut angle = precision.pi();
    angle *= &precision.rational(reduced);
    angle.sin()
}

/// SU(2) at level `k`: sectors `a = 0..=k`, `h_a = a(a+2)/(4(k+2))`,
/// `c = 3k/(k+2)`, `S_ab = sqrt(2/(k+2)) sin(π(a+1)(b+1)/(k+2))`.
pub fn build_su2(k: u32, precision: Precision) -> Result<ModularData> {
    if k == 0 {
        return Err(Error::TrivialLevel);
    }
    check_precision(precision)?;
    let n = k as usize + 1;
    let big_n = i64::from(k) + 2;
    let mut norm = precision.real(2);
    norm /= big_n;
    let norm = norm.sqrt();
    let s = CMatrix::from_fn(n, n, precision, |a, b| {
        let arg = Rational64::new((a as i64 + 1) * (b as i64 + 1), big_n);
        let mut v = sin_pi(arg, precision);
        v *= &norm;
        precision.complex(v)
    });
    let weights = (0..n as i64)
        .map(|a| Rational64::new(a * (a + 2), 4 * big_n))
        .collect();
    ModularData::new(
        format!("su2_{k}"),
        ModelFamily::Su2 { level: k },
        (0..n).map(|a| a.to_string()).collect(),
        Rational64::new(3 * i64::from(k), big_n),
        weights,
        s,
        precision,
    )
}

/// Conformal weight `h_{r,s}` of the `(p, p')` minimal model.
pub fn kac_weight(p: u32, p_prime: u32, r: u32, s: u32) -> Rational64 {
    let (p, pp, r, s) = (i64::from(p), i64::from(p_prime), i64::from(r), i64::from(s));
    let a = p * r - pp * s;
    Rational64::new(a * a - (p - pp) * (p - pp), 4 * p * pp)
}

/// Central charge `1 - 6(p-p')²/(pp')`.
pub fn minimal_central_charge(p: u32, p_prime: u32) -> Rational64 {
    let (p, pp) = (i64::from(p), i64::from(p_prime));
    Rational64::from_integer(1) - Rational64::new(6 * (p - pp) * (p - pp), p * pp)
}

/// Kac-table representatives: of each pair `(r,s) ~ (p'-r, p-s)` keep the
/// one with smaller `(s, r)`, then order by `(s, r)`. The vacuum `(1,1)`
/// comes first.
pub fn kac_representatives(p: u32, p_prime: u32) -> Vec<(u32, u32)> {
    let mut reps = Vec::new();
    for s in 1..p {
        for r in 1..p_prime {
            let partner = (p_prime - r, p - s);
            if (s, r) <= (partner.1, partner.0) {
                reps.push((r, s));
            }
        }
    }
    reps.sort_by_key(|&(r, s)| (s, r));
    reps
}

/// Virasoro minimal model `M(p, p')` with `2 <= p' < p`, `gcd(p, p') = 1`.
pub fn build_minimal(p: u32, p_prime: u32, precision: Precision) -> Result<ModularData> {
    let invalid = |reason: &str| Error::InvalidMinimalLabels {
        p,
        p_prime,
        reason: reason.to_string(),
    };
    if p_prime < 2 || p <= p_prime {
        return Err(invalid("need 2 <= p' < p"));
    }
    if p.gcd(&p_prime) != 1 {
        return Err(invalid("p and p' must be coprime"));
    }
    check_precision(precision)?;
    let kac = kac_representatives(p, p_prime);
    let n = kac.len();
    let (pi, ppi) = (i64::from(p), i64::from(p_prime));
    let mut norm = precision.real(8);
    norm /= pi * ppi;
    let norm = norm.sqrt();
    let s = CMatrix::from_fn(n, n, precision, |i, j| {
        let (r, s) = (i64::from(kac[i].0), i64::from(kac[i].1));
        let (rho, sigma) = (i64::from(kac[j].0), i64::from(kac[j].1));
        let mut v = sin_pi(Rational64::new(pi * r * rho, ppi), precision);
        v *= &sin_pi(Rational64::new(ppi * s * sigma, pi), precision);
        v *= &norm;
        if (1 + s * rho + r * sigma) % 2 != 0 {
            v = -v;
        }
        precision.complex(v)
    });
    let weights = kac
        .iter()
        .map(|&(r, s)| kac_weight(p, p_prime, r, s))
        .collect();
    ModularData::new(
        format!("minimal_{p}_{p_prime}"),
        ModelFamily::Minimal {
            p,
            p_prime,
            kac: kac.clone(),
        },
        kac.iter().map(|(r, s)| format!("({r},{s})")).collect(),
        minimal_central_charge(p, p_prime),
        weights,
        s,
        precision,
    )
}

// ---------------------------------------------------------------------------
// Model-description documents

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorRecord {
    pub name: String,
    /// Conformal weight as an exact fraction, e.g. `"1/16"`.
    pub h: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FamilyRecord {
    Su2 { level: u32 },
    Minimal { p: u32, p_prime: u32 },
}

/// An S-matrix entry: a decimal string, or `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryRecord {
    Real(String),
    Complex([String; 2]),
}

/// One model record: sectors with exact weights, exact central charge, and
/// either an explicit S matrix or a named builder (or both, in which case
/// the explicit S wins and the builder only tags the family).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub name: String,
    pub c: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    pub sectors: Vec<SectorRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_matrix: Option<Vec<Vec<EntryRecord>>>,
}

impl ModelDocument {
    /// Document describing `md` with its S matrix written out in full.
    pub fn from_modular_data(md: &ModularData) -> Self {
        let digits = md.precision().roundtrip_digits();
        let n = md.len();
        let fmt = |x: &Float| x.to_string_radix(10, Some(digits));
        let s_matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let z = &md.s()[(i, j)];
                        if z.imag().is_zero() {
                            EntryRecord::Real(fmt(z.real()))
                        } else {
                            EntryRecord::Complex([fmt(z.real()), fmt(z.imag())])
                        }
                    })
                    .collect()
            })
            .collect();
        let family = match md.family() {
            ModelFamily::Su2 { level } => Some(FamilyRecord::Su2 { level: *level }),
            ModelFamily::Minimal { p, p_prime, .. } => Some(FamilyRecord::Minimal {
                p: *p,
                p_prime: *p_prime,
            }),
            ModelFamily::Custom => None,
        };
        ModelDocument {
            format_version: FORMAT_VERSION,
            name: md.name().to_string(),
            c: format_rational(md.central_charge()),
            precision: Some(md.precision().digits()),
            sectors: md
                .sectors()
                .iter()
                .zip(md.weights())
                .map(|(s, &h)| SectorRecord {
                    name: s.name.clone(),
                    h: format_rational(h),
                })
                .collect(),
            family,
            s_matrix: Some(s_matrix),
        }
    }
}

fn parse_entry(e: &EntryRecord, precision: Precision) -> Result<Complex> {
    let parse = |s: &str| {
        parse_float(s, precision)
            .ok_or_else(|| Error::InvalidDocument(format!("bad S entry {s:?}")))
    };
    Ok(match e {
        EntryRecord::Real(re) => precision.complex(parse(re)?),
        EntryRecord::Complex([re, im]) => precision.complex((parse(re)?, parse(im)?)),
    })
}

/// Validate a model document and build its modular data. Every invariant
/// is checked; violations carry the failing residual.
pub fn load_model(doc: &ModelDocument) -> Result<ModularData> {
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: doc.format_version,
            expected: FORMAT_VERSION,
        });
    }
    let precision = Precision::new(doc.precision.unwrap_or(crate::numeric::DEFAULT_DIGITS));
    let c = parse_rational(&doc.c)
        .ok_or_else(|| Error::InvalidDocument(format!("bad central charge {:?}", doc.c)))?;
    let weights = doc
        .sectors
        .iter()
        .map(|s| {
            parse_rational(&s.h)
                .ok_or_else(|| Error::InvalidDocument(format!("bad weight {:?}", s.h)))
        })
        .collect::<Result<Vec<_>>>()?;
    let names: Vec<String> = doc.sectors.iter().map(|s| s.name.clone()).collect();
    if let Some(&h0) = weights.first() {
        if h0 != Rational64::from_integer(0) {
            return Err(Error::MissingVacuum {
                found: format_rational(h0),
            });
        }
    }

    let built = match &doc.family {
        Some(FamilyRecord::Su2 { level }) => Some(build_su2(*level, precision)?),
        Some(FamilyRecord::Minimal { p, p_prime }) => Some(build_minimal(*p, *p_prime, precision)?),
        None => None,
    };
    if let Some(b) = &built {
        if b.central_charge() != c || b.weights() != weights.as_slice() {
            return Err(Error::InvalidDocument(format!(
                "sectors or central charge disagree with the {:?} builder",
                doc.family
            )));
        }
    }

    match (&doc.s_matrix, built) {
        (Some(rows), built) => {
            let n = names.len();
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidDocument(format!(
                    "S must be {n}x{n} to match the sector list"
                )));
            }
            let mut s = CMatrix::zeros(n, n, precision);
            for (i, row) in rows.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    s[(i, j)] = parse_entry(e, precision)?;
                }
            }
            let family = built.map_or(ModelFamily::Custom, |b| b.family().clone());
            ModularData::new(doc.name.clone(), family, names, c, weights, s, precision)
        }
        (None, Some(b)) => ModularData::new(
            doc.name.clone(),
            b.family().clone(),
            names,
            c,
            weights,
            b.s().clone(),
            precision,
        ),
        (None, None) => Err(Error::InvalidDocument(
            "document needs an explicit s_matrix or a family builder".into(),
        )),
    }
}

/// Parse a JSON model document and load it.
pub fn load_model_str(text: &str) -> Result<ModularData> {
    let doc: ModelDocument = serde_json::from_str(text)?;
    load_model(&doc)
}
