//! Canonical interchange documents and a content-addressed result cache.
//!
//! Documents are JSON with sorted keys. Exact rationals are `"p/q"` strings,
//! big integers are decimal strings and floats are fixed-precision decimal
//! strings, so equal values always give byte-identical text.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigInt;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bcft::FullReport;
use crate::error::{Error, Result};
use crate::fusion::FusionRing;
use crate::intmat::IntMatrix;
use crate::invariants::ModularInvariant;
use crate::modular_data::{load_model, ModelDocument, ModularData, FORMAT_VERSION};
use crate::nimreps::Nimrep;
use crate::numeric::{format_rational, parse_rational};
use crate::qseries::QSeries;

/// Serialize with sorted keys and a trailing newline.
pub fn to_canonical<T: Serialize>(x: &T) -> Result<String> {
    // serde_json::Value keeps object keys in a BTreeMap.
    let value = serde_json::to_value(x)?;
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

fn check_version(found: u32) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found,
            expected: FORMAT_VERSION,
        });
    }
    Ok(())
}

/// Parse a document, reporting a version mismatch before any shape error.
pub fn from_document<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) => check_version(v as u32)?,
        None => return Err(Error::InvalidDocument("missing format_version".into())),
    }
    Ok(serde_json::from_value(value)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionRingDocument {
    pub format_version: u32,
    pub sectors: usize,
    pub conjugation: Vec<usize>,
    /// Non-zero `[σ, ρ, τ, N^τ_{σρ}]`, lexicographic.
    pub coefficients: Vec<[i64; 4]>,
}

impl FusionRingDocument {
    pub fn new(fr: &FusionRing) -> Self {
        FusionRingDocument {
            format_version: FORMAT_VERSION,
            sectors: fr.len(),
            conjugation: fr.conj().to_vec(),
            coefficients: fr
                .nonzero_entries()
                .into_iter()
                .map(|(s, r, t, c)| [s as i64, r as i64, t as i64, c])
                .collect(),
        }
    }

    pub fn load(&self) -> Result<FusionRing> {
        check_version(self.format_version)?;
        let n = self.sectors;
        let mut coeffs = vec![0i64; n * n * n];
        for &[s, r, t, c] in &self.coefficients {
            let idx = [s, r, t];
            if idx.iter().any(|&i| i < 0 || i as usize >= n) {
                return Err(Error::InvalidDocument(format!("fusion index {idx:?} out of range")));
            }
            coeffs[(s as usize * n + r as usize) * n + t as usize] = c;
        }
        FusionRing::from_tensor(n, self.conjugation.clone(), coeffs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantDocument {
    pub format_version: u32,
    pub tag: String,
    /// Rows of `Z` in sector order.
    pub z: Vec<Vec<i64>>,
    pub exponents: Vec<usize>,
}

impl InvariantDocument {
    pub fn new(z: &ModularInvariant) -> Self {
        InvariantDocument {
            format_version: FORMAT_VERSION,
            tag: z.tag().to_string(),
            z: z.z().rows(),
            exponents: z.exponents().to_vec(),
        }
    }

    /// Revalidate against `md`; the stored tag and exponents must agree with
    /// the recomputed ones.
    pub fn load(&self, md: &ModularData) -> Result<ModularInvariant> {
        check_version(self.format_version)?;
        let z = ModularInvariant::new(md, matrix_from_rows(&self.z)?)?;
        if z.tag() != self.tag || z.exponents() != self.exponents.as_slice() {
            return Err(Error::InvalidDocument(format!(
                "stored tag/exponents {} {:?} disagree with {} {:?}",
                self.tag,
                self.exponents,
                z.tag(),
                z.exponents()
            )));
        }
        Ok(z)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NimrepDocument {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub labels: Vec<String>,
    /// `n^ρ` for each sector in order, as rows.
    pub matrices: Vec<Vec<Vec<i64>>>,
}

impl NimrepDocument {
    pub fn new(nr: &Nimrep) -> Self {
        NimrepDocument {
            format_version: FORMAT_VERSION,
            name: nr.name().map(str::to_string),
            labels: nr.labels().to_vec(),
            matrices: nr.mats().iter().map(IntMatrix::rows).collect(),
        }
    }

    pub fn load(&self) -> Result<Nimrep> {
        check_version(self.format_version)?;
        let mats = self.matrices.iter().map(|m| matrix_from_rows(m)).collect::<Result<Vec<_>>>()?;
        let nr = Nimrep::new(self.labels.clone(), mats)?;
        Ok(match &self.name {
            Some(n) => nr.with_name(n.clone()),
            None => nr,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub offset: String,
    pub grid: u32,
    pub coefficients: Vec<String>,
}

impl SeriesDocument {
    pub fn new(s: &QSeries) -> Self {
        SeriesDocument {
            offset: format_rational(s.offset()),
            grid: s.grid(),
            coefficients: s.coeffs().iter().map(ToString::to_string).collect(),
        }
    }

    pub fn load(&self) -> Result<QSeries> {
        let offset = parse_rational(&self.offset)
            .ok_or_else(|| Error::InvalidDocument(format!("bad offset {:?}", self.offset)))?;
        if self.grid == 0 || self.coefficients.is_empty() {
            return Err(Error::InvalidDocument("a series needs a positive grid and at least one term".into()));
        }
        let coeffs = self
            .coefficients
            .iter()
            .map(|c| {
                c.parse::<BigInt>()
                    .map_err(|_| Error::InvalidDocument(format!("bad coefficient {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QSeries::new(offset, self.grid, coeffs))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharactersDocument {
    pub format_version: u32,
    pub model: String,
    pub order: usize,
    pub sectors: Vec<String>,
    pub characters: Vec<SeriesDocument>,
}

impl CharactersDocument {
    pub fn new(md: &ModularData, order: usize, chars: &[QSeries]) -> Self {
        CharactersDocument {
            format_version: FORMAT_VERSION,
            model: md.name().to_string(),
            order,
            sectors: md.sectors().iter().map(|s| s.name.clone()).collect(),
            characters: chars.iter().map(SeriesDocument::new).collect(),
        }
    }

    pub fn load(&self) -> Result<Vec<QSeries>> {
        check_version(self.format_version)?;
        self.characters.iter().map(SeriesDocument::load).collect()
    }
}

fn matrix_from_rows(rows: &[Vec<i64>]) -> Result<IntMatrix> {
    IntMatrix::from_rows(rows).ok_or_else(|| Error::InvalidDocument("matrix rows must be square".into()))
}

pub fn export_model(md: &ModularData) -> Result<String> {
    to_canonical(&ModelDocument::from_modular_data(md))
}

pub fn import_model(text: &str) -> Result<ModularData> {
    load_model(&from_document::<ModelDocument>(text)?)
}

pub fn export_fusion(fr: &FusionRing) -> Result<String> {
    to_canonical(&FusionRingDocument::new(fr))
}

pub fn import_fusion(text: &str) -> Result<FusionRing> {
    from_document::<FusionRingDocument>(text)?.load()
}

pub fn export_invariant(z: &ModularInvariant) -> Result<String> {
    to_canonical(&InvariantDocument::new(z))
}

pub fn export_invariants(zs: &[ModularInvariant]) -> Result<String> {
    to_canonical(&zs.iter().map(InvariantDocument::new).collect::<Vec<_>>())
}

pub fn import_invariant(text: &str, md: &ModularData) -> Result<ModularInvariant> {
    from_document::<InvariantDocument>(text)?.load(md)
}

pub fn export_nimrep(nr: &Nimrep) -> Result<String> {
    to_canonical(&NimrepDocument::new(nr))
}

pub fn import_nimrep(text: &str) -> Result<Nimrep> {
    from_document::<NimrepDocument>(text)?.load()
}

pub fn export_characters(md: &ModularData, order: usize, chars: &[QSeries]) -> Result<String> {
    to_canonical(&CharactersDocument::new(md, order, chars))
}

pub fn import_characters(text: &str) -> Result<Vec<QSeries>> {
    from_document::<CharactersDocument>(text)?.load()
}

pub fn export_report(r: &FullReport) -> Result<String> {
    to_canonical(r)
}

pub fn import_report(text: &str) -> Result<FullReport> {
    from_document(text)
}

/// Hex SHA-256 of the canonical form of `(operation, inputs, precision, order)`.
pub fn cache_key(operation: &str, inputs: &serde_json::Value, precision: u32, order: Option<usize>) -> Result<String> {
    let material = serde_json::json!({
        "operation": operation,
        "inputs": inputs,
        "precision": precision,
        "order": order,
    });
    Ok(hex::encode(Sha256::digest(to_canonical(&material)?.as_bytes())))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheMeta {
    pub artifact_version: String,
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub format_version: u32,
    pub key: String,
    /// Serialized result, stored verbatim.
    pub payload: String,
    pub meta: CacheMeta,
}

/// On-disk cache at `root/<first two hex chars>/<key>.json`.
#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.root.join(&key[..2.min(key.len())]).join(format!("{key}.json"))
    }

    /// Write through a temporary file and an atomic rename. Concurrent
    /// writers of one key write identical payloads, so the last one wins
    /// harmlessly.
    pub fn store(&self, key: &str, payload: &str) -> Result<PathBuf> {
        let path = self.path(key);
        let dir = path.parent().expect("cache paths have a parent");
        fs::create_dir_all(dir)?;
        let entry = CacheEntry {
            format_version: FORMAT_VERSION,
            key: key.to_string(),
            payload: payload.to_string(),
            meta: CacheMeta {
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            },
        };
        let nonce = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos());
        let tmp = dir.join(format!(".{key}.{}.{nonce}.tmp", std::process::id()));
        fs::write(&tmp, to_canonical(&entry)?)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Payload for `key`, or `None` on a miss.
    pub fn load(&self, key: &str) -> Result<Option<String>> {
        let path = self.path(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let entry: CacheEntry = from_document(&text)?;
        if entry.key != key {
            return Err(Error::InvalidDocument(format!("cache file {} holds key {}", path.display(), entry.key)));
        }
        Ok(Some(entry.payload))
    }

    /// Cached payload for the key, computing and storing it on a miss.
    pub fn get_or_compute(&self, key: &str, compute: impl FnOnce() -> Result<String>) -> Result<String> {
        if let Some(hit) = self.load(key)? {
            return Ok(hit);
        }
        let payload = compute()?;
        self.store(key, &payload)?;
        Ok(payload)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::characters;
    use crate::fusion::verlinde;
    use crate::invariants::enumerate_physical;
    use crate::modular_data::{build_minimal, build_su2};
    use crate::nimreps::regular_nimrep;
    use crate::numeric::Precision;
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn ising() -> ModularData {
        build_minimal(4, 3, Precision::new(50)).unwrap()
    }

    #[test]
    fn fusion_ring_store_load_byte_identical() {
        let fr = verlinde(&ising()).unwrap();
        let text = export_fusion(&fr).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let key = cache_key("fusion", &serde_json::json!({"model": "ising"}), 50, None).unwrap();
        let path = cache.store(&key, &text).unwrap();
        assert!(path.starts_with(dir.path().join(&key[..2])));
        assert_eq!(cache.load(&key).unwrap().unwrap(), text);
        assert_eq!(import_fusion(&text).unwrap(), fr);
        assert_eq!(cache.load("ffff").unwrap(), None);
    }

    #[test]
    fn key_depends_on_precision_and_order() {
        let inputs = serde_json::json!({"model": "su2", "level": 3});
        let a = cache_key("characters", &inputs, 50, Some(400)).unwrap();
        assert_ne!(a, cache_key("characters", &inputs, 60, Some(400)).unwrap());
        assert_ne!(a, cache_key("characters", &inputs, 50, Some(401)).unwrap());
        assert_ne!(a, cache_key("fusion", &inputs, 50, Some(400)).unwrap());
        assert_eq!(a, cache_key("characters", &inputs, 50, Some(400)).unwrap());
    }

    #[test]
    fn get_or_compute_hits() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let mut calls = 0;
        for _ in 0..2 {
            let v = cache
                .get_or_compute("abcd", || {
                    calls += 1;
                    Ok("payload\n".into())
                })
                .unwrap();
            assert_eq!(v, "payload\n");
        }
        assert_eq!(calls, 1);
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let fr = verlinde(&ising()).unwrap();
        let text = export_fusion(&fr).unwrap().replace("\"format_version\": 1", "\"format_version\": 99");
        assert!(matches!(
            import_fusion(&text),
            Err(Error::VersionMismatch { found: 99, expected: 1 })
        ));
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let path = cache.store("abcd", "x").unwrap();
        let stale = fs::read_to_string(&path).unwrap().replace("\"format_version\": 1", "\"format_version\": 0");
        fs::write(&path, stale).unwrap();
        assert!(matches!(cache.load("abcd"), Err(Error::VersionMismatch { found: 0, .. })));
    }

    #[test]
    fn invariant_rows_in_fixed_order() {
        let md = build_su2(4, Precision::new(50)).unwrap();
        let zs = enumerate_physical(&md).unwrap();
        for z in &zs {
            let text = export_invariant(z).unwrap();
            let doc: InvariantDocument = from_document(&text).unwrap();
            assert_eq!(doc.z, z.z().rows());
            assert_eq!(&import_invariant(&text, &md).unwrap(), z);
        }
        let d4 = zs.iter().find(|z| z.tag() == "D4").unwrap();
        assert!(export_invariant(d4).unwrap().contains("\"tag\": \"D4\""));
    }

    #[test]
    fn model_and_characters_round_trip() {
        let md = ising();
        let text = export_model(&md).unwrap();
        let back = import_model(&text).unwrap();
        assert_eq!(export_model(&back).unwrap(), text);
        let chars = characters(&md, 30).unwrap();
        let ctext = export_characters(&md, 30, &chars).unwrap();
        assert_eq!(import_characters(&ctext).unwrap(), chars);
        let nr = regular_nimrep(&verlinde(&md).unwrap());
        assert_eq!(import_nimrep(&export_nimrep(&nr).unwrap()).unwrap(), nr);
    }

    #[test]
    fn keys_are_sorted() {
        let nr = regular_nimrep(&verlinde(&ising()).unwrap()).with_name("regular");
        let text = export_nimrep(&nr).unwrap();
        let pos: Vec<usize> = ["format_version", "labels", "matrices", "name"]
            .iter()
            .map(|k| text.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    fn small_matrix(n: usize) -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec(0i64..4, n * n)
            .prop_map(move |v| IntMatrix::from_fn(n, |i, j| v[i * n + j]))
    }

    fn small_nimrep() -> impl Strategy<Value = Nimrep> {
        (1usize..4, 1usize..4).prop_flat_map(|(m, sectors)| {
            (
                proptest::collection::vec(small_matrix(m), sectors),
                proptest::option::of("[a-z]{1,3}"),
            )
                .prop_map(move |(mats, name)| {
                    let nr = Nimrep::new((0..m).map(|i| format!("b{i}")).collect(), mats).unwrap();
                    match name {
                        Some(n) => nr.with_name(n),
                        None => nr,
                    }
                })
        })
    }

    fn small_series() -> impl Strategy<Value = QSeries> {
        (-50i64..50, 1i64..25, 1u32..5, proptest::collection::vec(-1000i64..1000, 1..8)).prop_map(
            |(n, d, grid, c)| QSeries::new(Rational64::new(n, d), grid, c.into_iter().map(BigInt::from).collect()),
        )
    }

    proptest! {
        #[test]
        fn nimrep_round_trip_and_injective(a in small_nimrep(), b in small_nimrep()) {
            let (ta, tb) = (export_nimrep(&a).unwrap(), export_nimrep(&b).unwrap());
            prop_assert_eq!(import_nimrep(&ta).unwrap(), a.clone());
            prop_assert_eq!(a == b, ta == tb);
        }

        #[test]
        fn series_round_trip_and_injective(a in small_series(), b in small_series()) {
            let (da, db) = (to_canonical(&SeriesDocument::new(&a)).unwrap(), to_canonical(&SeriesDocument::new(&b)).unwrap());
            let back: SeriesDocument = serde_json::from_str(&da).unwrap();
            prop_assert_eq!(back.load().unwrap(), a.clone());
            prop_assert_eq!(a == b, da == db);
        }

        #[test]
        fn fusion_round_trip_and_injective(k1 in 1u32..7, k2 in 1u32..7) {
            let p = Precision::new(40);
            let a = verlinde(&build_su2(k1, p).unwrap()).unwrap();
            let b = verlinde(&build_su2(k2, p).unwrap()).unwrap();
            let (ta, tb) = (export_fusion(&a).unwrap(), export_fusion(&b).unwrap());
            prop_assert_eq!(import_fusion(&ta).unwrap(), a.clone());
            prop_assert_eq!(a == b, ta == tb);
        }
    }
}
