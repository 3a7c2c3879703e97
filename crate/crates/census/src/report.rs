//! Counts, surface classes and their text renderings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use quasiplatonic_core::bounds::{envelope, exponent_estimate};
use quasiplatonic_core::normal_search::RegularTable;
use quasiplatonic_core::quotient::CanonicalKey;
use quasiplatonic_core::singerman::{symmetries, transport, ExtensionError, Inclusions, RuleOrder};
use quasiplatonic_core::{CosetTable, Signature, Word};
use serde::Serialize;

use crate::store::{CensusRecord, CensusStore, StoreError, UnitId};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("record {0} does not decode to a regular table")]
    BadRecord(UnitId),
    #[error("extension while deduplicating {unit}: {source}")]
    Extension { unit: UnitId, source: ExtensionError },
    #[error("inclusion data: {0}")]
    Rules(String),
}

/// Torsion-free kernels sharing one surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceClass {
    pub key: CanonicalKey,
    pub genus: u64,
    /// Largest triangle group reached by the closure and the index there.
    pub top: (Signature, u64),
    /// `(signature, index, record key)` of every member.
    pub members: Vec<(Signature, u64, CanonicalKey)>,
}

/// Partitions the records by the key of their maximal closure. Classes are
/// sorted by genus, then top signature, then key.
pub fn dedupe_records(records: &[CensusRecord]) -> Result<Vec<SurfaceClass>, ReportError> {
    let inclusions = Inclusions::standard().map_err(|e| ReportError::Rules(e.to_string()))?;
    let mut classes: BTreeMap<CanonicalKey, SurfaceClass> = BTreeMap::new();
    for r in records {
        let table = r.regular_table().ok_or(ReportError::BadRecord(r.unit()))?;
        let closure = inclusions
            .maximal_closure(&table, RuleOrder::Forward)
            .map_err(|source| ReportError::Extension { unit: r.unit(), source })?;
        let class = classes.entry(closure.surface_key).or_insert_with(|| SurfaceClass {
            key: closure.surface_key,
            genus: r.genus,
            top: (closure.top.signature(), closure.top.index() as u64),
            members: Vec::new(),
        });
        class.members.push((r.signature, r.index, r.key));
    }
    let mut out: Vec<SurfaceClass> = classes.into_values().collect();
    for c in &mut out {
        c.members.sort();
    }
    out.sort_by_key(|a| (a.genus, a.top, a.key));
    Ok(out)
}

pub fn dedupe(store: &CensusStore, g: u64) -> Result<Vec<SurfaceClass>, ReportError> {
    dedupe_records(&store.complete_records(g)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenusRow {
    pub g: u64,
    #[serde(rename = "R")]
    pub r: u64,
    #[serde(rename = "S")]
    pub s: u64,
    #[serde(rename = "Q")]
    pub q: u64,
    pub lower: f64,
    pub upper: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignatureCount {
    pub genus: u64,
    pub signature: String,
    pub index: u64,
    pub count: u64,
}

/// The cumulative count under one way of identifying kernels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConventionCount {
    pub name: &'static str,
    pub by_genus: Vec<u64>,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountsReport {
    pub g: u64,
    pub rows: Vec<GenusRow>,
    pub by_signature: Vec<SignatureCount>,
    pub conventions: Vec<ConventionCount>,
    pub largest_class: u64,
}

impl CountsReport {
    pub fn s(&self) -> u64 {
        self.rows.last().map_or(0, |r| r.s)
    }

    /// Number of surface classes over all genera up to `g`.
    pub fn q(&self) -> u64 {
        self.rows.iter().map(|r| r.q).sum()
    }
}

/// Counts for genus at most `g`; fails on an incomplete store.
pub fn counts(store: &CensusStore, g: u64) -> Result<CountsReport, ReportError> {
    counts_from_records(g, &store.complete_records(g)?)
}

pub fn counts_from_records(g: u64, records: &[CensusRecord]) -> Result<CountsReport, ReportError> {
    let classes = dedupe_records(records)?;
    let mut r_by_genus: BTreeMap<u64, u64> = (2..=g).map(|k| (k, 0)).collect();
    let mut by_sig: BTreeMap<(u64, Signature, u64), u64> = BTreeMap::new();
    for rec in records {
        *r_by_genus.entry(rec.genus).or_default() += 1;
        *by_sig.entry((rec.genus, rec.signature, rec.index)).or_default() += 1;
    }
    let mut q_by_genus: BTreeMap<u64, u64> = BTreeMap::new();
    for c in &classes {
        *q_by_genus.entry(c.genus).or_default() += 1;
    }
    let mut rows = Vec::new();
    let mut s = 0;
    for (&genus, &r) in &r_by_genus {
        s += r;
        let (lower, upper) = envelope(genus);
        rows.push(GenusRow {
            g: genus,
            r,
            s,
            q: q_by_genus.get(&genus).copied().unwrap_or(0),
            lower,
            upper,
            exponent: exponent_estimate(s.max(1), genus),
        });
    }
    let by_signature = by_sig
        .into_iter()
        .map(|((genus, sig, index), count)| SignatureCount { genus, signature: sig.to_string(), index, count })
        .collect();
    Ok(CountsReport {
        g,
        rows,
        by_signature,
        conventions: conventions(g, records)?,
        largest_class: classes.iter().map(|c| c.members.len() as u64).max().unwrap_or(0),
    })
}

fn mirror() -> [Word; 2] {
    [Word::parse("a^-1").unwrap(), Word::parse("b^-1").unwrap()]
}

/// Orbit of a kernel under the automorphisms generated by `gens`, as the
/// least canonical table bytes.
fn orbit_min(table: &CosetTable, gens: &[[Word; 2]]) -> Vec<u8> {
    let start = table.to_bytes().expect("complete");
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![table.clone()];
    while let Some(t) = stack.pop() {
        for g in gens {
            let u = transport(&t, g);
            if seen.insert(u.to_bytes().expect("complete")) {
                stack.push(u);
            }
        }
    }
    seen.into_iter().next().expect("orbit holds the start")
}

/// Cumulative counts under alternative conventions: signatures as ordered
/// triples, kernels identified under the orientation-reversing automorphism
/// `γ0 ↦ γ0⁻¹, γ1 ↦ γ1⁻¹`, under the relabelings of the generators that keep
/// the orders, and under both.
fn conventions(g: u64, records: &[CensusRecord]) -> Result<Vec<ConventionCount>, ReportError> {
    let mut tables = Vec::with_capacity(records.len());
    for r in records {
        tables.push(r.regular_table().ok_or(ReportError::BadRecord(r.unit()))?);
    }
    let orderings = |sig: Signature| {
        let [p, q, r] = sig.orders();
        match (p == q, q == r) {
            (true, true) => 1,
            (false, false) => 6,
            _ => 3,
        }
    };
    let orbits = |gens_of: &dyn Fn(Signature) -> Vec<[Word; 2]>| -> Vec<u64> {
        let mut seen: BTreeSet<(u64, Signature, Vec<u8>)> = BTreeSet::new();
        for (r, t) in records.iter().zip(&tables) {
            seen.insert((r.genus, r.signature, orbit_min(t.table(), &gens_of(r.signature))));
        }
        (2..=g).map(|k| seen.iter().filter(|e| e.0 == k).count() as u64).collect()
    };
    let weighted = |w: &dyn Fn(&RegularTable) -> u64| -> Vec<u64> {
        (2..=g).map(|k| records.iter().zip(&tables).filter(|(r, _)| r.genus == k).map(|(_, t)| w(t)).sum()).collect()
    };
    let entry =
        |name: &'static str, by_genus: Vec<u64>| ConventionCount { name, total: by_genus.iter().sum(), by_genus };
    Ok(vec![
        entry("unordered signatures", weighted(&|_| 1)),
        entry("ordered signatures", weighted(&|t| orderings(t.signature()))),
        entry("mirror images identified", orbits(&|_| vec![mirror()])),
        entry("relabelings identified", orbits(&|s| symmetries(s))),
        entry(
            "relabelings and mirror identified",
            orbits(&|s| {
                let mut v = symmetries(s);
                v.push(mirror());
                v
            }),
        ),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "human" => Ok(Format::Human),
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            _ => Err(format!("unknown format {s:?} (human, csv, jsonl)")),
        }
    }
}

pub const BOUNDS_CSV_HEADER: &str = "g,R,S,Q,lower,upper,exponent";

/// `x` with 12 significant digits.
fn sig12(x: f64) -> String {
    let digits = if x == 0.0 { 11 } else { (11 - x.abs().log10().floor() as i64).max(0) as usize };
    format!("{x:.digits$}")
}

fn csv_row(r: &GenusRow) -> String {
    format!("{},{},{},{},{},{},{}", r.g, r.r, r.s, r.q, sig12(r.lower), sig12(r.upper), sig12(r.exponent))
}

pub fn render_counts(rep: &CountsReport, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(BOUNDS_CSV_HEADER);
            out.push('\n');
            for r in &rep.rows {
                out.push_str(&csv_row(r));
                out.push('\n');
            }
        }
        Format::Jsonl => {
            for r in &rep.rows {
                out.push_str(&serde_json::to_string(r).expect("plain data serializes"));
                out.push('\n');
            }
            for c in &rep.by_signature {
                out.push_str(&serde_json::to_string(c).expect("plain data serializes"));
                out.push('\n');
            }
        }
        Format::Human => {
            let g = rep.g;
            writeln!(out, "Torsion-free normal subgroups of hyperbolic triangle groups, genus 2 to {g}").unwrap();
            out.push('\n');
            writeln!(out, "{:>5} {:>6} {:>6} {:>6}", "genus", "R", "S", "Q").unwrap();
            for r in &rep.rows {
                writeln!(out, "{:>5} {:>6} {:>6} {:>6}", r.g, r.r, r.s, r.q).unwrap();
            }
            out.push('\n');
            writeln!(out, "S({g})={} Q({g})={}", rep.s(), rep.q()).unwrap();
            out.push('\n');
            writeln!(out, "By signature:").unwrap();
            writeln!(out, "{:>5}  {:<12} {:>6} {:>6}", "genus", "signature", "index", "R").unwrap();
            for c in &rep.by_signature {
                writeln!(out, "{:>5}  {:<12} {:>6} {:>6}", c.genus, format!("({})", c.signature), c.index, c.count)
                    .unwrap();
            }
            out.push('\n');
            writeln!(out, "Cumulative count S({g}) under other identifications:").unwrap();
            for c in &rep.conventions {
                let parts: Vec<String> = c.by_genus.iter().map(|v| v.to_string()).collect();
                writeln!(out, "  {:<36} {:>6}  ({})", c.name, c.total, parts.join(" + ")).unwrap();
            }
            out.push('\n');
            writeln!(out, "Largest surface class: {} record(s)", rep.largest_class).unwrap();
            writeln!(out, "Per-genus values are computed by this enumeration, not taken from a reference table.")
                .unwrap();
        }
    }
    out
}

pub fn render_bounds(rep: &CountsReport, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv | Format::Jsonl => return render_counts_rows_only(rep, format),
        Format::Human => {
            writeln!(
                out,
                "{:>5} {:>14} {:>6} {:>14} {:>9}  {:<8} {:<8}",
                "genus", "g^(ln g)", "S", "g^(2 ln g)", "exponent", "lower<S", "S<upper"
            )
            .unwrap();
            for r in &rep.rows {
                let (lo, hi) = (r.lower < r.s as f64, (r.s as f64) < r.upper);
                writeln!(
                    out,
                    "{:>5} {:>14.3} {:>6} {:>14.3} {:>9.4}  {:<8} {:<8}",
                    r.g,
                    r.lower,
                    r.s,
                    r.upper,
                    r.exponent,
                    if lo { "yes" } else { "no" },
                    if hi { "yes" } else { "no" }
                )
                .unwrap();
            }
            if let Some(last) = rep.rows.last() {
                let rel = if last.lower < last.s as f64 { "<" } else { ">=" };
                writeln!(out, "\n{:.1} {rel} {}", last.lower, last.s).unwrap();
            }
        }
    }
    out
}

fn render_counts_rows_only(rep: &CountsReport, format: Format) -> String {
    let mut out = String::new();
    if format == Format::Csv {
        out.push_str(BOUNDS_CSV_HEADER);
        out.push('\n');
        for r in &rep.rows {
            out.push_str(&csv_row(r));
            out.push('\n');
        }
    } else {
        for r in &rep.rows {
            out.push_str(&serde_json::to_string(r).expect("plain data serializes"));
            out.push('\n');
        }
    }
    out
}

pub fn render_classes(classes: &[SurfaceClass], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Human => {
            writeln!(out, "{:>5}  {:<16} {:>7} {:>7}  key", "genus", "top", "index", "members").unwrap();
            for c in classes {
                writeln!(
                    out,
                    "{:>5}  {:<16} {:>7} {:>7}  {}",
                    c.genus,
                    format!("({})", c.top.0),
                    c.top.1,
                    c.members.len(),
                    &c.key.to_hex()[..16]
                )
                .unwrap();
                for (sig, n, key) in &c.members {
                    writeln!(out, "{:>5}    ({sig})@{n} {}", "", &key.to_hex()[..16]).unwrap();
                }
            }
            writeln!(out, "{} class(es)", classes.len()).unwrap();
        }
        Format::Csv => {
            out.push_str("genus,top_signature,top_index,members,key\n");
            for c in classes {
                writeln!(out, "{},\"{}\",{},{},{}", c.genus, c.top.0, c.top.1, c.members.len(), c.key.to_hex())
                    .unwrap();
            }
        }
        Format::Jsonl => {
            for c in classes {
                let members: Vec<serde_json::Value> = c
                    .members
                    .iter()
                    .map(|(s, n, k)| serde_json::json!({"signature": s.to_string(), "index": n, "key": k.to_hex()}))
                    .collect();
                let v = serde_json::json!({
                    "genus": c.genus,
                    "top_signature": c.top.0.to_string(),
                    "top_index": c.top.1,
                    "key": c.key.to_hex(),
                    "members": members,
                });
                out.push_str(&v.to_string());
                out.push('\n');
            }
        }
    }
    out
}
