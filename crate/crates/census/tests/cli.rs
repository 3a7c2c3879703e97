use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use clap::Parser;
use quasiplatonic::cli::{exit, resolve_config, run, Cli};
use quasiplatonic::report::Format;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["quasiplatonic".into()];
    argv.extend(args.iter().map(|a| a.into()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err, Arc::new(AtomicBool::new(false)));
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn census(root: &Path, g: &str) {
    let store = root.to_str().unwrap();
    let (code, out, err) = cli(&["--store", store, "--workers", "2", "census", g, "--diagnostics-index", "0"]);
    assert_eq!(code, exit::OK, "{out}{err}");
}

#[test]
fn enumerate_rows() {
    let (code, out, _) = cli(&["enumerate", "7,7,7", "--max-index", "7", "--mode", "all"]);
    assert_eq!(code, exit::OK);
    assert_eq!(out.lines().count(), 1 + 9);
    let (code, out, _) = cli(&["enumerate", "4,4,4", "--max-index", "4", "--mode", "torsion-free"]);
    assert_eq!(code, exit::OK);
    assert_eq!(out.lines().count(), 1);
    let (code, out, _) = cli(&["--format", "jsonl", "enumerate", "2,3,7", "--max-index", "168"]);
    assert_eq!(code, exit::OK);
    assert_eq!(out.lines().count(), 1);
    assert!(out.contains("\"index\":168"));
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, err) = cli(&["enumerate", "2,3,6", "--max-index", "5"]);
    assert_eq!(code, exit::USAGE);
    assert!(err.contains("non-hyperbolic signature"), "{err}");
    assert_eq!(cli(&["enumerate", "2,x,7", "--max-index", "5"]).0, exit::USAGE);
    assert_eq!(cli(&["enumerate", "2,3,7", "--max-index", "5", "--mode", "some"]).0, exit::USAGE);
    assert_eq!(cli(&["frobnicate"]).0, exit::USAGE);
    assert_eq!(cli(&["report"]).0, exit::USAGE);
    assert_eq!(cli(&["--help"]).0, exit::OK);
}

#[test]
fn enumerate_budget_writes_a_checkpoint_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("run.ckpt");
    let cp_s = cp.to_str().unwrap();
    let args = ["--budget-nodes", "20", "enumerate", "2,3,7", "--max-index", "168", "--checkpoint", cp_s];
    let (code, _, err) = cli(&args);
    assert_eq!(code, exit::BUDGET);
    assert!(err.contains(cp_s), "{err}");
    let (code, out, _) = cli(&["enumerate", "2,3,7", "--max-index", "168", "--resume", cp_s]);
    assert_eq!(code, exit::OK);
    assert!(out.contains("e9a91a03"));
}

#[test]
fn reports_need_a_complete_store() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().to_str().unwrap();
    let (code, _, err) = cli(&["--store", store, "report", "5"]);
    assert_eq!(code, exit::INCOMPLETE);
    assert!(err.contains("census 5"), "{err}");
    let (code, _, _) = cli(&["--store", store, "--budget-nodes", "5", "census", "2", "--diagnostics-index", "0"]);
    assert_eq!(code, exit::BUDGET);
    let (code, _, err) = cli(&["--store", store, "report", "2"]);
    assert_eq!(code, exit::INCOMPLETE);
    assert!(err.contains("missing"), "{err}");
    assert_eq!(cli(&["--store", store, "dedupe", "2"]).0, exit::INCOMPLETE);
    assert_eq!(cli(&["--store", store, "bounds", "2"]).0, exit::INCOMPLETE);
}

#[test]
fn report_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    census(dir.path(), "3");
    let store = dir.path().to_str().unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let (code, out, _) = cli(&["--store", store, "report", "3"]);
    assert_eq!(code, exit::OK);
    assert_eq!(out, std::fs::read_to_string(golden.join("report_3.txt")).unwrap());
    let (_, csv, _) = cli(&["--store", store, "--format", "csv", "report", "3"]);
    assert_eq!(csv, std::fs::read_to_string(golden.join("report_3.csv")).unwrap());
    let (_, again, _) = cli(&["--store", store, "report", "3"]);
    assert_eq!(again, out);
}

#[test]
fn smaller_genus_reads_a_larger_census() {
    let dir = tempfile::tempdir().unwrap();
    census(dir.path(), "3");
    let store = dir.path().to_str().unwrap();
    let (code, out, _) = cli(&["--store", store, "report", "2"]);
    assert_eq!(code, exit::OK);
    assert!(out.contains("S(2)=13 Q(2)=3"), "{out}");
    let (code, out, _) = cli(&["--store", store, "bounds", "3"]);
    assert_eq!(code, exit::OK);
    assert!(out.contains("3.3 < 45"), "{out}");
    let (code, out, _) = cli(&["--store", store, "export", "3", "--signature", "7,7,7"]);
    assert_eq!(code, exit::OK);
    assert_eq!(out.lines().count(), 5);
    let (code, out, _) = cli(&["--store", store, "--format", "jsonl", "dedupe", "3"]);
    assert_eq!(code, exit::OK);
    assert_eq!(out.lines().count(), 11);
}

#[test]
fn signatures_and_inclusions() {
    let (code, out, _) = cli(&["--format", "csv", "signatures", "--max-genus", "2"]);
    assert_eq!(code, exit::OK);
    assert!(out.contains("\"2,3,8\",2,48"));
    let (code, out, _) = cli(&["validate-inclusions", "--max-parameter", "5"]);
    assert_eq!(code, exit::OK);
    assert!(!out.contains("FAIL"));
    assert!(out.contains("sporadic-777 (7,7,7) < (2,3,7) [24]"));
}

#[test]
fn configuration_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("q.toml");
    std::fs::write(&conf, "store = \"from-file\"\nworkers = 3\nformat = \"csv\"\nmax_genus = 4\n").unwrap();
    let conf_s = conf.to_str().unwrap();
    let parse = |args: &[&str]| {
        let mut argv = vec!["quasiplatonic"];
        argv.extend_from_slice(args);
        Cli::try_parse_from(argv).unwrap()
    };
    let env = Some(PathBuf::from("from-env"));
    let c = resolve_config(&parse(&["--config", conf_s, "--store", "from-flag", "report"]), env.clone()).unwrap();
    assert_eq!(c.store, PathBuf::from("from-flag"));
    assert_eq!((c.workers, c.format, c.max_genus), (3, Format::Csv, Some(4)));
    let c = resolve_config(&parse(&["--config", conf_s, "--workers", "5", "report"]), env.clone()).unwrap();
    assert_eq!((c.store.clone(), c.workers), (PathBuf::from("from-file"), 5));
    let c = resolve_config(&parse(&["report"]), env).unwrap();
    assert_eq!((c.store, c.format), (PathBuf::from("from-env"), Format::Human));
    let c = resolve_config(&parse(&["report"]), None).unwrap();
    assert_eq!(c.store, PathBuf::from("store"));
    std::fs::write(&conf, "colour = 1\n").unwrap();
    assert!(resolve_config(&parse(&["--config", conf_s, "report"]), None).is_err());
    assert_eq!(cli(&["--workers", "0", "report", "2"]).0, exit::USAGE);
}
