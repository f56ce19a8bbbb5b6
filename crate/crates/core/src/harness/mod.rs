//! Experiment driver behind the `bdi` binary.
//!
//! Every entry point takes a fully resolved [`RunConfig`]. Results are plain
//! serde types, written as JSON with `schema: 1`. Ablation and sweep cells run
//! in parallel; each cell is deterministic on its own, so the output does not
//! depend on scheduling.

mod ablate;
mod config;
mod output;
mod report;
mod run;
mod stats;
mod sweep;

pub use ablate::{ablate, AblationTable, Variant, VariantSummary};
pub use config::{ConfigOverrides, KernelKind, RunConfig, SeedList};
pub use output::{write_atomic, write_json};
pub use report::{setting_key, summarize, sweep_csv, trace_csv, Document, SettingSummary, Summary};
pub use run::{
    run_all, run_once, DatasetInfo, Evaluated, RunReport, SimilarityStats, TaskInfo, PROVENANCE,
    SCHEMA_VERSION, SIMILARITY_FRACTION,
};
pub use stats::{mean, median, stderr};
pub use sweep::{parse_grid, sweep, SweepParam, SweepPoint, SweepTable};

/// JSON schema of [`RunReport`].
pub const RUN_REPORT_SCHEMA: &str = include_str!("../../schema/run_report.schema.json");
