use std::fs;
use std::path::Path;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use quasiplatonic::export::{export_dessins, Dessin, ExportFilter};
use quasiplatonic::report::{counts, ReportError};
use quasiplatonic::store::{units_for, StoreError};
use quasiplatonic::{run_census, CensusRecord, CensusStore, RunOptions};
use quasiplatonic_core::Signature;

fn quick() -> RunOptions {
    RunOptions { diagnostics_index: 0, ..RunOptions::default() }
}

fn files(store: &CensusStore) -> Vec<(String, Vec<u8>)> {
    ["records.jsonl", "manifest.json", "diagnostics.jsonl"]
        .iter()
        .map(|f| (f.to_string(), fs::read(store.dir().join(f)).unwrap_or_default()))
        .collect()
}

fn fresh(root: &Path, g: u64, opts: &RunOptions) -> CensusStore {
    let store = CensusStore::new(root, g);
    let summary = run_census(&store, opts).unwrap();
    assert!(summary.is_complete());
    store
}

#[test]
fn seven_seven_seven_has_five_records_at_genus_three() {
    let dir = tempfile::tempdir().unwrap();
    let store = fresh(dir.path(), 3, &quick());
    let sig: Signature = "7,7,7".parse().unwrap();
    let recs: Vec<CensusRecord> = store.records().unwrap().into_iter().filter(|r| r.signature == sig).collect();
    assert_eq!(recs.len(), 5);
    assert!(recs.iter().all(|r| r.genus == 3 && r.index == 7 && r.torsion_free));
}

#[test]
fn records_respect_riemann_hurwitz() {
    let dir = tempfile::tempdir().unwrap();
    let store = fresh(dir.path(), 3, &quick());
    for r in store.records().unwrap() {
        assert!(r.torsion_free && (2..=3).contains(&r.genus));
        assert!(2 * r.genus - 2 < r.index && r.index <= 84 * (r.genus - 1));
        assert!(r.orders.iter().all(|&o| o as u64 <= 84 * r.genus));
        assert_eq!(CensusRecord::from_json_line(&r.to_json_line()).unwrap(), r);
        assert!(r.regular_table().is_some());
    }
}

#[test]
fn extending_the_genus_bound_matches_a_fresh_run() {
    let a = tempfile::tempdir().unwrap();
    fresh(a.path(), 2, &quick());
    let extended = CensusStore::new(a.path(), 3);
    let summary = run_census(&extended, &quick()).unwrap();
    assert_eq!(summary.reused.len(), units_for(2).len());
    let b = tempfile::tempdir().unwrap();
    let direct = fresh(b.path(), 3, &quick());
    assert_eq!(files(&extended), files(&direct));
}

#[test]
fn rerunning_a_complete_store_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let store = fresh(dir.path(), 2, &quick());
    let before = files(&store);
    let summary = run_census(&store, &quick()).unwrap();
    assert!(summary.completed.is_empty());
    assert_eq!(summary.already_complete, units_for(2).len());
    assert_eq!(files(&store), before);
}

#[test]
fn worker_count_does_not_change_the_store() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let opts = RunOptions { diagnostics_index: 12, ..RunOptions::default() };
    let one = fresh(a.path(), 3, &RunOptions { workers: 1, ..opts.clone() });
    let many = fresh(b.path(), 3, &RunOptions { workers: 4, ..opts });
    assert_eq!(files(&one), files(&many));
}

#[test]
fn node_budget_runs_resume_to_the_same_store() {
    let dir = tempfile::tempdir().unwrap();
    let store = CensusStore::new(dir.path(), 3);
    let opts = RunOptions { node_budget: Some(40), ..quick() };
    let mut rounds = 0;
    loop {
        let summary = run_census(&store, &opts).unwrap();
        rounds += 1;
        if summary.is_complete() {
            break;
        }
        assert!(summary.incomplete.iter().all(|(_, why)| why == "node budget"));
        assert!(matches!(counts(&store, 3), Err(ReportError::Store(StoreError::Incomplete(_)))));
        assert!(rounds < 500);
    }
    assert!(rounds > 1);
    assert!(fs::read_dir(store.checkpoint_dir()).unwrap().next().is_none());
    let other = tempfile::tempdir().unwrap();
    let direct = fresh(other.path(), 3, &quick());
    assert_eq!(fs::read(store.records_path()).unwrap(), fs::read(direct.records_path()).unwrap());
}

#[test]
fn records_of_unfinished_units_are_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let store = fresh(dir.path(), 2, &quick());
    let mut m = store.manifest().unwrap();
    let victim = m.units.iter_mut().find(|u| u.signature == "5,5,5").unwrap();
    victim.status = quasiplatonic::store::UnitStatus::Pending;
    store.write_manifest(&m).unwrap();
    let missing = store.missing_units(2).unwrap();
    assert_eq!(missing.len(), 1);
    assert_eq!(missing[0].to_string(), "(5,5,5)@5");
    assert!(store.records().unwrap().iter().all(|r| r.signature.to_string() != "5,5,5"));
    let err = counts(&store, 2).unwrap_err();
    assert!(err.to_string().contains("(5,5,5)@5"), "{err}");
    run_census(&store, &quick()).unwrap();
    assert_eq!(store.raw_records().unwrap().len(), 13);
}

#[test]
fn interrupt_leaves_units_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    let store = CensusStore::new(dir.path(), 2);
    let opts = RunOptions { interrupt: Arc::new(AtomicBool::new(true)), ..quick() };
    let summary = run_census(&store, &opts).unwrap();
    assert_eq!(summary.incomplete.len(), units_for(2).len());
    assert!(matches!(counts(&store, 2), Err(ReportError::Store(StoreError::Incomplete(_)))));
}

#[test]
fn exported_dessins_regenerate_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let store = fresh(dir.path(), 3, &quick());
    let filter = ExportFilter { genus: None, signature: Some("7,7,7".parse().unwrap()) };
    let dessins = export_dessins(&store, &filter).unwrap();
    assert_eq!(dessins.len(), 5);
    let records = store.records().unwrap();
    for d in &dessins {
        assert_eq!(d.x.len(), 7);
        let back: Dessin = serde_json::from_str(&serde_json::to_string(d).unwrap()).unwrap();
        let rec = records.iter().find(|r| r.key.to_hex() == back.key).unwrap();
        assert_eq!(back.table_bytes(), rec.table);
    }
    let all = export_dessins(&store, &ExportFilter::default()).unwrap();
    assert_eq!(all.len(), records.len());
    assert!(all.iter().all(|d| d.n > 1));
}

#[test]
fn diagnostics_hold_bound_and_prime_checks() {
    let dir = tempfile::tempdir().unwrap();
    let store = fresh(dir.path(), 2, &RunOptions { diagnostics_index: 16, ..RunOptions::default() });
    let diags = store.diagnostics().unwrap();
    let sigs: std::collections::BTreeSet<_> = units_for(2).iter().map(|u| u.signature.to_string()).collect();
    assert_eq!(diags.len(), sigs.len());
    for d in &diags {
        assert!(d.complete && d.lubotzky_ok && d.n_max == 16);
        assert_eq!(d.by_index.first(), Some(&(1, 1)));
        assert_eq!(d.total, d.by_index.iter().map(|x| x.1).sum::<u64>());
    }
}
