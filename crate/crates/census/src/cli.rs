//! Command-line interface. [`run`] takes the arguments and output streams so
//! that tests can drive it without a subprocess.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use quasiplatonic_core::normal_search::{Checkpoint, NormalSearch, SearchConfig, SearchError, SearchMode};
use quasiplatonic_core::signatures::admissible_signatures;
use quasiplatonic_core::singerman::{validate_rule, Inclusions, RuleInstance};
use quasiplatonic_core::{CosetTable, Signature};
use serde::Deserialize;

use crate::export::{export_dessins, ExportFilter};
use crate::report::{self, Format, ReportError};
use crate::run::{run_census, RunOptions, DEFAULT_DIAGNOSTICS_INDEX};
use crate::store::{CensusStore, StoreError};

pub const STORE_ENV: &str = "QUASIPLATONIC_STORE";
pub const DEFAULT_STORE: &str = "store";

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const BUDGET: i32 = 3;
    pub const INCOMPLETE: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "quasiplatonic", version, about = "Census of regular dessins and quasiplatonic surfaces")]
pub struct Cli {
    /// Store directory [default: $QUASIPLATONIC_STORE, then ./store]
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,
    /// TOML file with defaults for the other flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output format: human, csv or jsonl
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Worker threads for census runs
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Search nodes per work unit per run
    #[arg(long, global = true)]
    pub budget_nodes: Option<u64>,
    /// Wall-clock seconds per work unit per run
    #[arg(long, global = true)]
    pub budget_seconds: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GenusArg {
    /// Genus bound
    #[arg(value_name = "G")]
    pub genus: Option<u64>,
    /// Genus bound, as a flag
    #[arg(long = "max-genus", value_name = "G")]
    pub max_genus: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List admissible signatures with their genera and indices
    Signatures(GenusArg),
    /// Normal subgroups of bounded index in one triangle group
    Enumerate {
        /// Signature "p,q,r"
        signature: String,
        /// Largest index searched
        #[arg(long)]
        max_index: usize,
        /// all or torsion-free
        #[arg(long, default_value = "torsion-free")]
        mode: String,
        /// Where to write the checkpoint if a budget runs out
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from a checkpoint file
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Turn off the cycle-length prune
        #[arg(long)]
        no_uniform_cycle: bool,
        /// Turn on the left-translation prune
        #[arg(long)]
        left_coherence: bool,
    },
    /// Run or resume the census up to a genus bound
    Census {
        #[command(flatten)]
        genus: GenusArg,
        /// Index bound of the all-mode diagnostics (0 skips them)
        #[arg(long)]
        diagnostics_index: Option<usize>,
    },
    /// R, S and Q per genus from a complete store
    Report(GenusArg),
    /// Surface classes of a complete store
    Dedupe(GenusArg),
    /// Counts against the g^(ln g) and g^(2 ln g) envelopes
    Bounds(GenusArg),
    /// Check every shipped inclusion rule at small parameters
    ValidateInclusions {
        /// Largest value tried for each rule parameter
        #[arg(long, default_value_t = 9)]
        max_parameter: u32,
    },
    /// Regular dessins of the store as permutation pairs (jsonl)
    Export {
        #[command(flatten)]
        genus: GenusArg,
        /// Only this genus
        #[arg(long)]
        only_genus: Option<u64>,
        /// Only this signature
        #[arg(long)]
        signature: Option<String>,
    },
}

/// Values read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub store: Option<PathBuf>,
    pub workers: Option<usize>,
    pub budget_nodes: Option<u64>,
    pub budget_seconds: Option<f64>,
    pub format: Option<String>,
    pub max_genus: Option<u64>,
    pub diagnostics_index: Option<usize>,
}

/// Settings after applying flags, config file, environment and defaults,
/// in that order of precedence.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub store: PathBuf,
    pub workers: usize,
    pub budget_nodes: Option<u64>,
    pub budget_seconds: Option<f64>,
    pub format: Format,
    pub max_genus: Option<u64>,
    pub diagnostics_index: usize,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Failure {
        let code = match e {
            StoreError::Missing(_) | StoreError::Incomplete(_) => exit::INCOMPLETE,
            _ => exit::FAILURE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Failure {
        match e {
            ReportError::Store(s) => s.into(),
            other => Failure::new(exit::FAILURE, other.to_string()),
        }
    }
}

pub fn resolve_config(cli: &Cli, env_store: Option<PathBuf>) -> Result<RunConfig, String> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            toml::from_str::<ConfigFile>(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ConfigFile::default(),
    };
    let format = match (&cli.format, &file.format) {
        (Some(f), _) => *f,
        (None, Some(s)) => s.parse()?,
        (None, None) => Format::Human,
    };
    let workers =
        cli.workers.or(file.workers).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err("worker count must be at least 1".into());
    }
    Ok(RunConfig {
        store: cli.store.clone().or(file.store).or(env_store).unwrap_or_else(|| PathBuf::from(DEFAULT_STORE)),
        workers,
        budget_nodes: cli.budget_nodes.or(file.budget_nodes),
        budget_seconds: cli.budget_seconds.or(file.budget_seconds),
        format,
        max_genus: file.max_genus,
        diagnostics_index: file.diagnostics_index.unwrap_or(DEFAULT_DIAGNOSTICS_INDEX),
    })
}

fn genus_of(arg: &GenusArg, cfg: &RunConfig) -> Result<u64, Failure> {
    let g = arg
        .genus
        .or(arg.max_genus)
        .or(cfg.max_genus)
        .ok_or_else(|| Failure::new(exit::USAGE, "a genus bound is required (G or --max-genus)"))?;
    if g < 2 {
        return Err(Failure::new(exit::USAGE, "the genus bound must be at least 2"));
    }
    Ok(g)
}

fn parse_signature(s: &str) -> Result<Signature, Failure> {
    s.parse::<Signature>().map_err(|e| Failure::new(exit::USAGE, e.to_string()))
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Results go to `out`, diagnostics to `err`.
pub fn run(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write, interrupt: Arc<AtomicBool>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let text = e.render().to_string();
            let _ = if code == exit::OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let env_store = std::env::var_os(STORE_ENV).map(PathBuf::from);
    let cfg = match resolve_config(&cli, env_store) {
        Ok(c) => c,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return exit::USAGE;
        }
    };
    match dispatch(&cli, &cfg, out, err, interrupt) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(
    cli: &Cli,
    cfg: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
    interrupt: Arc<AtomicBool>,
) -> Result<i32, Failure> {
    let text = match &cli.command {
        Command::Signatures(g) => cmd_signatures(genus_of(g, cfg)?, cfg.format),
        Command::Enumerate { signature, max_index, mode, checkpoint, resume, no_uniform_cycle, left_coherence } => {
            let sig = parse_signature(signature)?;
            let mode = match mode.as_str() {
                "all" => SearchMode::All,
                "torsion-free" | "torsion_free" => SearchMode::TorsionFreeOnly,
                other => return Err(Failure::new(exit::USAGE, format!("unknown mode {other:?} (all, torsion-free)"))),
            };
            if *max_index == 0 {
                return Err(Failure::new(exit::USAGE, "--max-index must be at least 1"));
            }
            let search_cfg = SearchConfig::new(*max_index, mode)
                .with_prunes(!no_uniform_cycle, *left_coherence)
                .with_node_budget(cfg.budget_nodes);
            return cmd_enumerate(sig, search_cfg, cfg, checkpoint.as_deref(), resume.as_deref(), out, err, interrupt);
        }
        Command::Census { genus, diagnostics_index } => {
            let g = genus_of(genus, cfg)?;
            return cmd_census(g, diagnostics_index.unwrap_or(cfg.diagnostics_index), cfg, out, interrupt);
        }
        Command::Report(g) => {
            let g = genus_of(g, cfg)?;
            let rep = report::counts(&covering_store(cfg, g)?, g)?;
            report::render_counts(&rep, cfg.format)
        }
        Command::Dedupe(g) => {
            let g = genus_of(g, cfg)?;
            report::render_classes(&report::dedupe(&covering_store(cfg, g)?, g)?, cfg.format)
        }
        Command::Bounds(g) => {
            let g = genus_of(g, cfg)?;
            let rep = report::counts(&covering_store(cfg, g)?, g)?;
            report::render_bounds(&rep, cfg.format)
        }
        Command::ValidateInclusions { max_parameter } => {
            let (text, ok) = cmd_validate(*max_parameter, cfg)?;
            out.write_all(text.as_bytes()).map_err(|e| Failure::new(exit::FAILURE, e.to_string()))?;
            return Ok(if ok { exit::OK } else { exit::FAILURE });
        }
        Command::Export { genus, only_genus, signature } => {
            let g = genus_of(genus, cfg)?;
            let filter =
                ExportFilter { genus: *only_genus, signature: signature.as_deref().map(parse_signature).transpose()? };
            let store = covering_store(cfg, g)?;
            let mut text = String::new();
            for d in export_dessins(&store, &filter)?.into_iter().filter(|d| d.genus <= g) {
                text.push_str(&serde_json::to_string(&d).expect("plain data serializes"));
                text.push('\n');
            }
            text
        }
    };
    let _ = err;
    out.write_all(text.as_bytes()).map_err(|e| Failure::new(exit::FAILURE, e.to_string()))?;
    Ok(exit::OK)
}

fn covering_store(cfg: &RunConfig, g: u64) -> Result<CensusStore, Failure> {
    CensusStore::open_covering(&cfg.store, g).ok_or_else(|| {
        Failure::new(
            exit::INCOMPLETE,
            format!("no census covering genus {g} in {}; run `census {g}` first", cfg.store.display()),
        )
    })
}

fn cmd_signatures(g: u64, format: Format) -> String {
    let mut out = String::new();
    if format == Format::Human {
        writeln!(out, "{:<12} {:>5} {:>6}", "signature", "genus", "index").unwrap();
    } else if format == Format::Csv {
        out.push_str("signature,genus,index\n");
    }
    for (sig, pairs) in admissible_signatures(g) {
        for p in pairs {
            match format {
                Format::Human => writeln!(out, "{:<12} {:>5} {:>6}", format!("({sig})"), p.genus, p.index),
                Format::Csv => writeln!(out, "\"{sig}\",{},{}", p.genus, p.index),
                Format::Jsonl => writeln!(
                    out,
                    "{}",
                    serde_json::json!({"signature": sig.to_string(), "genus": p.genus, "index": p.index})
                ),
            }
            .unwrap();
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_enumerate(
    sig: Signature,
    search_cfg: SearchConfig,
    cfg: &RunConfig,
    checkpoint: Option<&Path>,
    resume: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
    interrupt: Arc<AtomicBool>,
) -> Result<i32, Failure> {
    let mut search = match resume {
        Some(path) => {
            let bytes =
                std::fs::read(path).map_err(|e| Failure::new(exit::USAGE, format!("{}: {e}", path.display())))?;
            let cp = Checkpoint::from_bytes(&bytes).map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
            NormalSearch::resume(sig, search_cfg, &cp).map_err(|e| Failure::new(exit::USAGE, e.to_string()))?
        }
        None => NormalSearch::new(sig, search_cfg),
    };
    let format = cfg.format;
    let mut rows = String::new();
    match format {
        Format::Human => writeln!(rows, "{:>6}  {:<12} {:<3} {:>5}  key", "index", "orders", "tf", "genus").unwrap(),
        Format::Csv => rows.push_str("index,orders,torsion_free,genus,key\n"),
        Format::Jsonl => {}
    }
    let started = Instant::now();
    let limit = cfg.budget_seconds.map(Duration::from_secs_f64);
    let result = search.run(
        &mut |t| {
            let info = t.info();
            let [a, b, c] = info.orders;
            let genus = info.genus.map_or("-".to_string(), |g| g.to_string());
            match format {
                Format::Human => writeln!(
                    rows,
                    "{:>6}  {:<12} {:<3} {:>5}  {}",
                    info.n,
                    format!("{a},{b},{c}"),
                    if info.torsion_free { "yes" } else { "no" },
                    genus,
                    info.canonical_key
                ),
                Format::Csv => {
                    writeln!(rows, "{},\"{a},{b},{c}\",{},{},{}", info.n, info.torsion_free, genus, info.canonical_key)
                }
                Format::Jsonl => writeln!(
                    rows,
                    "{}",
                    serde_json::json!({
                        "index": info.n,
                        "orders": info.orders,
                        "torsion_free": info.torsion_free,
                        "genus": info.genus,
                        "key": info.canonical_key.to_hex(),
                    })
                ),
            }
            .unwrap();
        },
        &mut |_| interrupt.load(Ordering::SeqCst) || limit.is_some_and(|l| started.elapsed() >= l),
    );
    out.write_all(rows.as_bytes()).map_err(|e| Failure::new(exit::FAILURE, e.to_string()))?;
    match result {
        Ok(()) => Ok(exit::OK),
        Err(e) => {
            let Some(cp) = e.checkpoint() else {
                return Err(Failure::new(exit::FAILURE, e.to_string()));
            };
            let path = checkpoint.map(Path::to_path_buf).unwrap_or_else(|| {
                let [p, q, r] = sig.orders();
                let mode = match search_cfg.mode {
                    SearchMode::All => "all",
                    SearchMode::TorsionFreeOnly => "torsion-free",
                };
                PathBuf::from(format!("enumerate-{p}-{q}-{r}-{}-{mode}.ckpt", search_cfg.n_max))
            });
            std::fs::write(&path, cp.to_bytes())
                .map_err(|e| Failure::new(exit::FAILURE, format!("{}: {e}", path.display())))?;
            let what =
                if matches!(e, SearchError::BudgetExceeded { .. }) { "node budget exhausted" } else { "stopped" };
            let _ = writeln!(err, "{what} after {} nodes; checkpoint written to {}", cp.stats.nodes, path.display());
            Ok(exit::BUDGET)
        }
    }
}

fn cmd_census(
    g: u64,
    diagnostics_index: usize,
    cfg: &RunConfig,
    out: &mut dyn Write,
    interrupt: Arc<AtomicBool>,
) -> Result<i32, Failure> {
    let store = CensusStore::new(&cfg.store, g);
    let opts = RunOptions {
        workers: cfg.workers,
        node_budget: cfg.budget_nodes,
        time_budget: cfg.budget_seconds.map(Duration::from_secs_f64),
        diagnostics_index,
        interrupt,
    };
    let summary = run_census(&store, &opts)?;
    let mut text = String::new();
    let total = summary.completed.len() + summary.reused.len() + summary.already_complete + summary.incomplete.len();
    writeln!(
        text,
        "census {g}: {total} units, {} searched, {} reused, {} already complete, {} incomplete",
        summary.completed.len(),
        summary.reused.len(),
        summary.already_complete,
        summary.incomplete.len()
    )
    .unwrap();
    for (unit, reason) in &summary.incomplete {
        writeln!(text, "  incomplete {unit}: {reason}").unwrap();
    }
    if !summary.diagnostics_incomplete.is_empty() {
        let list: Vec<String> = summary.diagnostics_incomplete.iter().map(|s| format!("({s})")).collect();
        writeln!(text, "  diagnostics incomplete: {}", list.join(" ")).unwrap();
    }
    writeln!(text, "store: {}", store.dir().display()).unwrap();
    out.write_all(text.as_bytes()).map_err(|e| Failure::new(exit::FAILURE, e.to_string()))?;
    Ok(if summary.is_complete() { exit::OK } else { exit::BUDGET })
}

/// Instances of every rule with parameters in `2..=max_parameter`.
pub fn rule_instances(inclusions: &Inclusions, max_parameter: u32) -> Vec<RuleInstance> {
    let mut out: Vec<RuleInstance> = Vec::new();
    for rule in inclusions.rules() {
        let mut vars: Vec<char> = rule.sub.0.iter().chain(rule.sup.0.iter()).filter_map(|e| e.var).collect();
        vars.sort();
        vars.dedup();
        let mut values = vec![2u32; vars.len()];
        loop {
            let params: Vec<(char, u32)> = vars.iter().copied().zip(values.iter().copied()).collect();
            if let Some(inst) = rule.instantiate(&params) {
                if !out.iter().any(|o| o.rule == inst.rule && o.params == inst.params) {
                    out.push(inst);
                }
            }
            let Some(i) = values.iter().position(|&v| v < max_parameter) else { break };
            values[i] += 1;
            for v in &mut values[..i] {
                *v = 2;
            }
        }
    }
    out
}

fn cmd_validate(max_parameter: u32, cfg: &RunConfig) -> Result<(String, bool), Failure> {
    let inclusions = Inclusions::standard().map_err(|e| Failure::new(exit::FAILURE, e.to_string()))?;
    // Quotients of the larger groups from the largest complete census, if any.
    let quotients: Vec<(Signature, CosetTable)> = CensusStore::new(&cfg.store, 0)
        .siblings()
        .into_iter()
        .rev()
        .find(|s| s.missing_units(s.g_max()).is_ok_and(|m| m.is_empty()))
        .and_then(|s| s.records().ok())
        .unwrap_or_default()
        .into_iter()
        .filter_map(|r| Some((r.signature, CosetTable::from_bytes(&r.table).ok()?)))
        .collect();
    let mut text = String::new();
    let mut all_ok = true;
    for inst in rule_instances(&inclusions, max_parameter) {
        let supers: Vec<CosetTable> =
            quotients.iter().filter(|(s, _)| *s == inst.sup).map(|(_, t)| t.clone()).take(16).collect();
        let rep = validate_rule(&inst, &supers);
        all_ok &= rep.passed();
        let found = rep.found_index.map_or("-".to_string(), |i| i.to_string());
        writeln!(
            text,
            "{:<4} {:<44} index {:>2}/{:<3} orientation {:<3} quotients {}/{}",
            if rep.passed() { "ok" } else { "FAIL" },
            rep.instance,
            found,
            rep.claimed_index,
            if rep.orientation_ok { "ok" } else { "bad" },
            rep.quotients_checked - rep.quotient_failures,
            rep.quotients_checked
        )
        .unwrap();
    }
    Ok((text, all_ok))
}
