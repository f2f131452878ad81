//! Orchestration layer: CLI, flat key=value configuration, reproducibility
//! manifests, and result persistence (JSONL records, RFC-4180 CSV).

mod cli;
mod config;
mod records;

pub use cli::cli_main;
pub use config::{fnv1a64, Settings};
pub use records::{
    fmt_f64, read_jsonl, write_csv, write_jsonl, write_manifest, ResultRecord, RunManifest,
};
