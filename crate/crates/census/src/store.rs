//! On-disk census store.
//!
//! Layout under the store root, per genus bound `G`:
//!
//! ```text
//! census/G/records.jsonl      one torsion-free kernel per line
//! census/G/manifest.json      every work unit and its status
//! census/G/diagnostics.jsonl  all-mode counts at small index
//! census/G/checkpoints/       search checkpoints of unfinished units
//! ```
//!
//! Records of a unit are appended before the manifest marks it complete, so
//! after a crash any records of units that are not complete are ignored and
//! dropped at the next compaction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use quasiplatonic_core::normal_search::RegularTable;
use quasiplatonic_core::quotient::CanonicalKey;
use quasiplatonic_core::signatures::admissible_signatures;
use quasiplatonic_core::{CosetTable, Signature};
use serde::{Deserialize, Serialize};

pub const STORE_FORMAT: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("store has no census for genus bound {0}")]
    Missing(u64),
    #[error("incomplete store, {} unit(s) missing: {}", .0.len(), list_units(.0))]
    Incomplete(Vec<UnitId>),
}

fn list_units(units: &[UnitId]) -> String {
    let shown: Vec<String> = units.iter().take(12).map(|u| u.to_string()).collect();
    let more = if units.len() > 12 { format!(" and {} more", units.len() - 12) } else { String::new() };
    format!("{}{more}", shown.join(" "))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

/// One work unit: a signature at one admissible index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitId {
    pub genus: u64,
    pub signature: Signature,
    pub index: u64,
}

impl UnitId {
    /// File-name friendly form, e.g. `2-3-7_168`.
    pub fn file_stem(&self) -> String {
        let [p, q, r] = self.signature.orders();
        format!("{p}-{q}-{r}_{}", self.index)
    }
}

impl fmt::Display for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})@{}", self.signature, self.index)
    }
}

/// All units for genera `2..=g_max`, sorted by genus, signature, index.
pub fn units_for(g_max: u64) -> Vec<UnitId> {
    let mut out: Vec<UnitId> = admissible_signatures(g_max)
        .into_iter()
        .flat_map(|(signature, pairs)| {
            pairs.into_iter().map(move |p| UnitId { genus: p.genus, signature, index: p.index })
        })
        .collect();
    out.sort();
    out
}

/// A stored torsion-free kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRecord {
    pub signature: Signature,
    pub index: u64,
    pub genus: u64,
    pub orders: [u32; 3],
    pub torsion_free: bool,
    pub key: CanonicalKey,
    pub table: Vec<u8>,
    /// Identifies the search configuration that produced the record.
    pub run: String,
}

impl CensusRecord {
    pub fn from_table(t: &RegularTable, run: &str) -> CensusRecord {
        let info = t.info();
        CensusRecord {
            signature: t.signature(),
            index: info.n,
            genus: info.genus.unwrap_or(0),
            orders: info.orders,
            torsion_free: info.torsion_free,
            key: info.canonical_key,
            table: t.to_bytes(),
            run: run.to_string(),
        }
    }

    pub fn unit(&self) -> UnitId {
        UnitId { genus: self.genus, signature: self.signature, index: self.index }
    }

    /// Rebuilds and rechecks the regular table.
    pub fn regular_table(&self) -> Option<RegularTable> {
        let table = CosetTable::from_bytes(&self.table).ok()?;
        RegularTable::new(self.signature, table)
    }

    fn sort_key(&self) -> (UnitId, CanonicalKey) {
        (self.unit(), self.key)
    }

    pub fn to_json_line(&self) -> String {
        let line = RecordLine {
            signature: self.signature.to_string(),
            index: self.index,
            genus: self.genus,
            orders: self.orders,
            torsion_free: self.torsion_free,
            key: self.key.to_hex(),
            table: BASE64.encode(&self.table),
            run: self.run.clone(),
        };
        serde_json::to_string(&line).expect("plain data serializes")
    }

    pub fn from_json_line(s: &str) -> Result<CensusRecord, String> {
        let line: RecordLine = serde_json::from_str(s).map_err(|e| e.to_string())?;
        let signature: Signature = line.signature.parse().map_err(|e| format!("{e}"))?;
        let key = CanonicalKey::from_hex(&line.key).ok_or("bad key")?;
        let table = BASE64.decode(&line.table).map_err(|e| e.to_string())?;
        Ok(CensusRecord {
            signature,
            index: line.index,
            genus: line.genus,
            orders: line.orders,
            torsion_free: line.torsion_free,
            key,
            table,
            run: line.run,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    signature: String,
    index: u64,
    genus: u64,
    orders: [u32; 3],
    torsion_free: bool,
    key: String,
    table: String,
    run: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitStatus {
    Pending,
    Incomplete,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitEntry {
    pub signature: String,
    pub index: u64,
    pub genus: u64,
    pub status: UnitStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<u64>,
    /// Search nodes over all runs of the unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub g_max: u64,
    pub mode: String,
    pub units: Vec<UnitEntry>,
}

impl Manifest {
    pub fn fresh(g_max: u64) -> Manifest {
        let units = units_for(g_max)
            .into_iter()
            .map(|u| UnitEntry {
                signature: u.signature.to_string(),
                index: u.index,
                genus: u.genus,
                status: UnitStatus::Pending,
                records: None,
                nodes: None,
                run: None,
                reason: None,
            })
            .collect();
        Manifest { format: STORE_FORMAT, g_max, mode: "torsion-free".into(), units }
    }

    pub fn entry(&self, unit: &UnitId) -> Option<&UnitEntry> {
        let sig = unit.signature.to_string();
        self.units.iter().find(|e| e.signature == sig && e.index == unit.index)
    }

    pub fn entry_mut(&mut self, unit: &UnitId) -> Option<&mut UnitEntry> {
        let sig = unit.signature.to_string();
        self.units.iter_mut().find(|e| e.signature == sig && e.index == unit.index)
    }

    pub fn is_complete(&self, unit: &UnitId) -> bool {
        self.entry(unit).is_some_and(|e| e.status == UnitStatus::Complete)
    }
}

/// All-mode counts for one signature at small index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub signature: String,
    pub n_max: u64,
    pub complete: bool,
    /// `(index, count)` for every index with at least one normal subgroup.
    pub by_index: Vec<(u64, u64)>,
    /// The same restricted to torsion-free kernels.
    pub torsion_free_by_index: Vec<(u64, u64)>,
    pub total: u64,
    /// Total at most the normal-subgroup bound of the free group of rank 2.
    pub lubotzky_ok: bool,
    pub prime_triple: bool,
    /// For prime triples: every proper kernel found is torsion-free.
    pub prime_property: Option<bool>,
    pub nodes: u64,
}

/// Handle on `census/<g_max>` under a store root.
#[derive(Debug, Clone)]
pub struct CensusStore {
    root: PathBuf,
    g_max: u64,
}

impl CensusStore {
    pub fn new(root: impl Into<PathBuf>, g_max: u64) -> CensusStore {
        CensusStore { root: root.into(), g_max }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn g_max(&self) -> u64 {
        self.g_max
    }

    pub fn dir(&self) -> PathBuf {
        self.root.join("census").join(self.g_max.to_string())
    }

    pub fn records_path(&self) -> PathBuf {
        self.dir().join("records.jsonl")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir().join("manifest.json")
    }

    pub fn diagnostics_path(&self) -> PathBuf {
        self.dir().join("diagnostics.jsonl")
    }

    pub fn checkpoint_dir(&self) -> PathBuf {
        self.dir().join("checkpoints")
    }

    pub fn checkpoint_path(&self, unit: &UnitId) -> PathBuf {
        self.checkpoint_dir().join(format!("{}.ckpt", unit.file_stem()))
    }

    pub fn partial_path(&self, unit: &UnitId) -> PathBuf {
        self.checkpoint_dir().join(format!("{}.partial.jsonl", unit.file_stem()))
    }

    pub fn exists(&self) -> bool {
        self.manifest_path().exists()
    }

    /// Creates the directory and a fresh manifest unless one exists.
    pub fn init(&self) -> Result<Manifest, StoreError> {
        let dir = self.dir();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        if self.exists() {
            return self.manifest();
        }
        let m = Manifest::fresh(self.g_max);
        self.write_manifest(&m)?;
        Ok(m)
    }

    pub fn manifest(&self) -> Result<Manifest, StoreError> {
        let path = self.manifest_path();
        if !path.exists() {
            return Err(StoreError::Missing(self.g_max));
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| StoreError::Corrupt { path, line: e.line(), message: e.to_string() })
    }

    pub fn write_manifest(&self, m: &Manifest) -> Result<(), StoreError> {
        let mut text = serde_json::to_string_pretty(m).expect("plain data serializes");
        text.push('\n');
        write_atomic(&self.manifest_path(), text.as_bytes())
    }

    /// Every line of the record log, including records of units that are not
    /// complete.
    pub fn raw_records(&self) -> Result<Vec<CensusRecord>, StoreError> {
        read_records(&self.records_path())
    }

    /// Records of complete units, deduplicated and in canonical order.
    pub fn records(&self) -> Result<Vec<CensusRecord>, StoreError> {
        let m = self.manifest()?;
        let mut seen = BTreeSet::new();
        let mut out: Vec<CensusRecord> =
            self.raw_records()?.into_iter().filter(|r| m.is_complete(&r.unit()) && seen.insert(r.sort_key())).collect();
        out.sort_by_key(|r| r.sort_key());
        Ok(out)
    }

    pub fn append_records(&self, records: &[CensusRecord]) -> Result<(), StoreError> {
        append_lines(&self.records_path(), records.iter().map(|r| r.to_json_line()))
    }

    /// Rewrites the record log in canonical order with only the records of
    /// complete units.
    pub fn compact(&self) -> Result<(), StoreError> {
        let records = self.records()?;
        let mut text = String::new();
        for r in &records {
            text.push_str(&r.to_json_line());
            text.push('\n');
        }
        write_atomic(&self.records_path(), text.as_bytes())
    }

    pub fn diagnostics(&self) -> Result<Vec<Diagnostic>, StoreError> {
        let path = self.diagnostics_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        let file = fs::File::open(&path).map_err(io_err(&path))?;
        let mut out = Vec::new();
        for (i, line) in io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(&path))?;
            if line.trim().is_empty() {
                continue;
            }
            let d: Diagnostic = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                path: path.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
            out.push(d);
        }
        Ok(out)
    }

    pub fn append_diagnostic(&self, d: &Diagnostic) -> Result<(), StoreError> {
        append_lines(&self.diagnostics_path(), [serde_json::to_string(d).expect("plain data serializes")])
    }

    /// Keeps the last complete diagnostic per signature, sorted by signature.
    pub fn compact_diagnostics(&self) -> Result<(), StoreError> {
        let mut by_sig: BTreeMap<Signature, Diagnostic> = BTreeMap::new();
        for d in self.diagnostics()? {
            let sig: Signature = match d.signature.parse() {
                Ok(s) => s,
                Err(_) => continue,
            };
            if d.complete || !by_sig.get(&sig).is_some_and(|old| old.complete) {
                by_sig.insert(sig, d);
            }
        }
        let mut text = String::new();
        for d in by_sig.values() {
            text.push_str(&serde_json::to_string(d).expect("plain data serializes"));
            text.push('\n');
        }
        write_atomic(&self.diagnostics_path(), text.as_bytes())
    }

    /// Units for genus at most `g` that are not complete.
    pub fn missing_units(&self, g: u64) -> Result<Vec<UnitId>, StoreError> {
        let m = self.manifest()?;
        Ok(units_for(g.min(self.g_max)).into_iter().filter(|u| !m.is_complete(u)).collect())
    }

    /// Records for genus at most `g`, failing unless every such unit is
    /// complete.
    pub fn complete_records(&self, g: u64) -> Result<Vec<CensusRecord>, StoreError> {
        if g > self.g_max {
            return Err(StoreError::Missing(g));
        }
        let missing = self.missing_units(g)?;
        if !missing.is_empty() {
            return Err(StoreError::Incomplete(missing));
        }
        Ok(self.records()?.into_iter().filter(|r| r.genus <= g).collect())
    }

    /// Census directories present under the root, by genus bound.
    pub fn siblings(&self) -> Vec<CensusStore> {
        let Ok(entries) = fs::read_dir(self.root.join("census")) else {
            return Vec::new();
        };
        let mut out: Vec<CensusStore> = entries
            .filter_map(|e| e.ok()?.file_name().to_str()?.parse::<u64>().ok())
            .filter(|&g| g != self.g_max)
            .map(|g| CensusStore::new(self.root.clone(), g))
            .filter(|s| s.exists())
            .collect();
        out.sort_by_key(|s| s.g_max);
        out
    }

    /// Smallest complete census directory covering genus `g`, if any.
    pub fn open_covering(root: &Path, g: u64) -> Option<CensusStore> {
        let probe = CensusStore::new(root, g);
        if probe.exists() {
            return Some(probe);
        }
        probe.siblings().into_iter().find(|s| s.g_max >= g)
    }
}

fn read_records(path: &Path) -> Result<Vec<CensusRecord>, StoreError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let r = CensusRecord::from_json_line(&line).map_err(|message| StoreError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        })?;
        out.push(r);
    }
    Ok(out)
}

pub(crate) fn read_partial(path: &Path) -> Result<Vec<CensusRecord>, StoreError> {
    read_records(path)
}

pub(crate) fn append_lines(path: &Path, lines: impl IntoIterator<Item = String>) -> Result<(), StoreError> {
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path).map_err(io_err(path))?;
    let mut text = String::new();
    for l in lines {
        text.push_str(&l);
        text.push('\n');
    }
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    f.sync_data().map_err(io_err(path))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_data().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub(crate) fn remove_if_exists(path: &Path) -> Result<(), StoreError> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != io::ErrorKind::NotFound => Err(StoreError::Io { path: path.to_path_buf(), source: e }),
        _ => Ok(()),
    }
}
