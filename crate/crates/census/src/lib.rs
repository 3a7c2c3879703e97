//! Census of torsion-free normal subgroups of hyperbolic triangle groups:
//! the on-disk store, parallel census runs, counts, surface
//! deduplication, dessin export and the command-line interface.

pub mod cli;
pub mod export;
pub mod report;
pub mod run;
pub mod store;

pub use export::{export_dessins, Dessin, ExportFilter};
pub use report::{counts, dedupe, CountsReport, SurfaceClass};
pub use run::{run_census, RunOptions, RunSummary};
pub use store::{CensusRecord, CensusStore, UnitId};
