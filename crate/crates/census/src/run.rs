//! Census runs: a queue of work units consumed by a pool of worker threads,
//! with this thread as the single writer to the store.

use std::collections::BTreeMap;
use std::fs;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::time::{Duration, Instant};

use quasiplatonic_core::bounds::lubotzky_bound;
use quasiplatonic_core::normal_search::{Checkpoint, NormalSearch, SearchConfig, SearchError};
use quasiplatonic_core::Signature;

use crate::store::{self, units_for, CensusRecord, CensusStore, Diagnostic, StoreError, UnitId, UnitStatus};

/// Identifies the search configuration behind stored records. Units from
/// another genus bound are reused only when this matches.
pub fn run_id() -> String {
    format!("quasiplatonic-{}:torsion-free:uniform-cycle", env!("CARGO_PKG_VERSION"))
}

pub const DEFAULT_DIAGNOSTICS_INDEX: usize = 64;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    /// Search nodes per unit per run.
    pub node_budget: Option<u64>,
    /// Wall-clock time per unit per run.
    pub time_budget: Option<Duration>,
    /// Index bound of the all-mode diagnostics; 0 skips them.
    pub diagnostics_index: usize,
    /// Set from outside (Ctrl-C) to checkpoint and stop.
    pub interrupt: Arc<AtomicBool>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: 1,
            node_budget: None,
            time_budget: None,
            diagnostics_index: DEFAULT_DIAGNOSTICS_INDEX,
            interrupt: Arc::new(AtomicBool::new(false)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunSummary {
    /// Units searched to completion in this run.
    pub completed: Vec<UnitId>,
    /// Units copied from the census of another genus bound.
    pub reused: Vec<UnitId>,
    /// Units already complete before this run.
    pub already_complete: usize,
    /// Units left incomplete, with the reason.
    pub incomplete: Vec<(UnitId, String)>,
    pub diagnostics_run: usize,
    pub diagnostics_incomplete: Vec<Signature>,
}

impl RunSummary {
    pub fn is_complete(&self) -> bool {
        self.incomplete.is_empty()
    }
}

enum Job {
    Unit(UnitId),
    Diagnostic(Signature),
}

enum Outcome {
    Complete { unit: UnitId, records: Vec<CensusRecord>, nodes: u64 },
    Incomplete { unit: UnitId, checkpoint: Checkpoint, partial: Vec<CensusRecord>, reason: String },
    Diagnostic(Diagnostic),
    Failed(StoreError),
}

/// Runs every unit of `census/<g_max>` that is not complete yet, then the
/// all-mode diagnostics, and leaves the store in canonical order.
pub fn run_census(store: &CensusStore, opts: &RunOptions) -> Result<RunSummary, StoreError> {
    assert!(store.g_max() >= 2, "census needs a genus bound of at least 2");
    let mut manifest = store.init()?;
    fs::create_dir_all(store.checkpoint_dir())
        .map_err(|source| StoreError::Io { path: store.checkpoint_dir(), source })?;
    let mut summary = RunSummary::default();
    let run = run_id();

    let mut pending = Vec::new();
    for unit in units_for(store.g_max()) {
        if manifest.is_complete(&unit) {
            summary.already_complete += 1;
            continue;
        }
        if let Some((records, nodes)) = reusable(store, &unit, &run)? {
            store.append_records(&records)?;
            mark_complete(&mut manifest, &unit, records.len(), nodes, &run);
            store.write_manifest(&manifest)?;
            summary.reused.push(unit);
            continue;
        }
        pending.push(unit);
    }

    let mut jobs: Vec<Job> = pending.into_iter().map(Job::Unit).collect();
    if opts.diagnostics_index > 0 {
        let done: BTreeMap<String, Diagnostic> =
            store.diagnostics()?.into_iter().map(|d| (d.signature.clone(), d)).collect();
        let mut sigs: Vec<Signature> = units_for(store.g_max()).iter().map(|u| u.signature).collect();
        sigs.sort();
        sigs.dedup();
        for sig in sigs {
            let have = done.get(&sig.to_string());
            if !have.is_some_and(|d| d.complete && d.n_max == opts.diagnostics_index as u64) {
                jobs.push(Job::Diagnostic(sig));
            }
        }
    }

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<Outcome>();
    let mut first_error = None;
    std::thread::scope(|scope| {
        for _ in 0..opts.workers.max(1) {
            let tx = tx.clone();
            let (next, jobs) = (&next, &jobs);
            scope.spawn(move || loop {
                if opts.interrupt.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                let outcome = match job {
                    Job::Unit(u) => run_unit(store, *u, opts),
                    Job::Diagnostic(s) => Outcome::Diagnostic(run_diagnostic(*s, opts)),
                };
                if tx.send(outcome).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for outcome in rx {
            if let Err(e) = write_outcome(store, &mut manifest, &mut summary, outcome, &run) {
                opts.interrupt.store(true, Ordering::SeqCst);
                first_error.get_or_insert(e);
            }
        }
    });
    if let Some(e) = first_error {
        return Err(e);
    }

    // Units never started because of an interrupt.
    for unit in units_for(store.g_max()) {
        let listed = summary.incomplete.iter().any(|(u, _)| *u == unit);
        if !manifest.is_complete(&unit) && !listed {
            summary.incomplete.push((unit, "not started".into()));
        }
    }
    summary.completed.sort();
    summary.incomplete.sort();
    summary.diagnostics_incomplete.sort();
    store.write_manifest(&manifest)?;
    store.compact()?;
    store.compact_diagnostics()?;
    Ok(summary)
}

fn mark_complete(m: &mut store::Manifest, unit: &UnitId, records: usize, nodes: u64, run: &str) {
    let e = m.entry_mut(unit).expect("unit listed in manifest");
    e.status = UnitStatus::Complete;
    e.records = Some(records as u64);
    e.nodes = Some(nodes);
    e.run = Some(run.to_string());
    e.reason = None;
}

/// Records of `unit` from another census directory that completed it with
/// the same configuration.
fn reusable(store: &CensusStore, unit: &UnitId, run: &str) -> Result<Option<(Vec<CensusRecord>, u64)>, StoreError> {
    for other in store.siblings() {
        let m = other.manifest()?;
        let Some(e) = m.entry(unit) else { continue };
        if e.status != UnitStatus::Complete || e.run.as_deref() != Some(run) {
            continue;
        }
        let records: Vec<CensusRecord> = other.records()?.into_iter().filter(|r| r.unit() == *unit).collect();
        if records.len() as u64 != e.records.unwrap_or(0) {
            continue;
        }
        return Ok(Some((records, e.nodes.unwrap_or(0))));
    }
    Ok(None)
}

fn write_outcome(
    store: &CensusStore,
    manifest: &mut store::Manifest,
    summary: &mut RunSummary,
    outcome: Outcome,
    run: &str,
) -> Result<(), StoreError> {
    match outcome {
        Outcome::Complete { unit, records, nodes } => {
            store.append_records(&records)?;
            mark_complete(manifest, &unit, records.len(), nodes, run);
            store.write_manifest(manifest)?;
            store::remove_if_exists(&store.checkpoint_path(&unit))?;
            store::remove_if_exists(&store.partial_path(&unit))?;
            log::info!("{unit}: {} record(s), {nodes} nodes", records.len());
            summary.completed.push(unit);
        }
        Outcome::Incomplete { unit, checkpoint, partial, reason } => {
            store::write_atomic(&store.checkpoint_path(&unit), &checkpoint.to_bytes())?;
            let mut text = String::new();
            for r in &partial {
                text.push_str(&r.to_json_line());
                text.push('\n');
            }
            store::write_atomic(&store.partial_path(&unit), text.as_bytes())?;
            let e = manifest.entry_mut(&unit).expect("unit listed in manifest");
            e.status = UnitStatus::Incomplete;
            e.nodes = Some(checkpoint.stats.nodes);
            e.reason = Some(reason.clone());
            store.write_manifest(manifest)?;
            log::warn!("{unit}: incomplete ({reason}), checkpoint {}", store.checkpoint_path(&unit).display());
            summary.incomplete.push((unit, reason));
        }
        Outcome::Diagnostic(d) => {
            store.append_diagnostic(&d)?;
            summary.diagnostics_run += 1;
            if !d.complete {
                summary.diagnostics_incomplete.push(d.signature.parse().expect("written from a signature"));
            }
        }
        Outcome::Failed(e) => return Err(e),
    }
    Ok(())
}

fn stop_hook(opts: &RunOptions) -> impl FnMut(&quasiplatonic_core::normal_search::SearchStats) -> bool + '_ {
    let started = Instant::now();
    move |_| opts.interrupt.load(Ordering::SeqCst) || opts.time_budget.is_some_and(|b| started.elapsed() >= b)
}

fn stop_reason(err: &SearchError, opts: &RunOptions) -> String {
    match err {
        SearchError::BudgetExceeded { .. } => "node budget".into(),
        SearchError::Interrupted { .. } if opts.interrupt.load(Ordering::SeqCst) => "interrupted".into(),
        SearchError::Interrupted { .. } => "time budget".into(),
        SearchError::BadCheckpoint(m) => format!("bad checkpoint: {m}"),
    }
}

fn run_unit(store: &CensusStore, unit: UnitId, opts: &RunOptions) -> Outcome {
    let cfg = SearchConfig::torsion_free(unit.index as usize).with_node_budget(opts.node_budget);
    let resumed = match load_checkpoint(store, &unit, cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::Failed(e),
    };
    let (mut search, mut records) = resumed.unwrap_or_else(|| (NormalSearch::new(unit.signature, cfg), Vec::new()));
    let run = run_id();
    let result = search.run(
        &mut |t| {
            if t.index() as u64 == unit.index {
                records.push(CensusRecord::from_table(&t, &run));
            }
        },
        &mut stop_hook(opts),
    );
    match result {
        Ok(()) => Outcome::Complete { unit, records, nodes: search.stats().nodes },
        Err(err) => {
            let reason = stop_reason(&err, opts);
            match err {
                SearchError::BudgetExceeded { checkpoint } | SearchError::Interrupted { checkpoint } => {
                    Outcome::Incomplete { unit, checkpoint, partial: records, reason }
                }
                SearchError::BadCheckpoint(_) => unreachable!("fresh searches produce no checkpoint errors"),
            }
        }
    }
}

/// A saved checkpoint with its partial records, or `None` to start over
/// (no checkpoint, or one that does not match this unit).
fn load_checkpoint(
    store: &CensusStore,
    unit: &UnitId,
    cfg: SearchConfig,
) -> Result<Option<(NormalSearch, Vec<CensusRecord>)>, StoreError> {
    let path = store.checkpoint_path(unit);
    let Ok(bytes) = fs::read(&path) else { return Ok(None) };
    let resumed = Checkpoint::from_bytes(&bytes).and_then(|cp| NormalSearch::resume(unit.signature, cfg, &cp));
    match resumed {
        Ok(search) => {
            let partial = store::read_partial(&store.partial_path(unit))?;
            Ok(Some((search, partial)))
        }
        Err(e) => {
            log::warn!("{unit}: discarding checkpoint ({e})");
            Ok(None)
        }
    }
}

/// All-mode counts for one signature up to the diagnostics index.
pub fn run_diagnostic(sig: Signature, opts: &RunOptions) -> Diagnostic {
    let n = opts.diagnostics_index;
    let cfg = SearchConfig::all(n).with_node_budget(opts.node_budget);
    let mut by_index: BTreeMap<u64, u64> = BTreeMap::new();
    let mut tf_by_index: BTreeMap<u64, u64> = BTreeMap::new();
    let mut proper_with_torsion = 0u64;
    let mut search = NormalSearch::new(sig, cfg);
    let result = search.run(
        &mut |t| {
            let k = t.index() as u64;
            *by_index.entry(k).or_default() += 1;
            if t.info().torsion_free {
                *tf_by_index.entry(k).or_default() += 1;
            } else if k > 1 {
                proper_with_torsion += 1;
            }
        },
        &mut stop_hook(opts),
    );
    let complete = result.is_ok();
    let total: u64 = by_index.values().sum();
    let prime_triple = sig.is_prime_triple();
    Diagnostic {
        signature: sig.to_string(),
        n_max: n as u64,
        complete,
        by_index: by_index.into_iter().collect(),
        torsion_free_by_index: tf_by_index.into_iter().collect(),
        total,
        lubotzky_ok: lubotzky_bound(n.max(1) as u64) >= total.into(),
        prime_triple,
        prime_property: prime_triple.then_some(proper_with_torsion == 0),
        nodes: search.stats().nodes,
    }
}
