//! Command layer: configuration, stage commands and their on-disk outputs.
//!
//! Every command takes an output root. Each writes its own subdirectory
//! (`synth/`, `ingest/`, `analyze/`, `predict/`, `calibrate/`, `report/`)
//! with a `manifest.json`, and reads upstream results from the siblings.

mod analyze;
mod calibrate;
mod config;
mod corpus;
mod generate;
mod ingest;
mod manifest;
mod predict;
mod report;

use std::path::Path;

pub use analyze::{cascade_dir, cmd_analyze, load_analyses, networks_before, CascadeStatus, ANALYSIS_FILE};
pub use calibrate::{calibrate_from_labels, cmd_calibrate, parse_labels, read_labels, CalibrationOutcome};
pub use config::{
    apply_override, AnalyzeConfig, HawkesSection, InhibitionSection, InputConfig, MotifConfig, PredictionConfig, RunConfig,
    SignificanceConfig, SynthConfig, TransitionConfig, WindowConfig,
};
pub use corpus::{digest, Corpus, CorpusEntry};
pub use generate::{cmd_synth, GroundTruth, PlantedCascade, PlantedRelation, TruthEntry};
pub use ingest::{cmd_ingest, load_corpus, resolve_inputs, CORPUS_FILE};
pub use manifest::{CascadeFailure, LifecycleEntry, RunManifest, MANIFEST_FILE, TOOL_VERSION};
pub use predict::{
    cmd_predict, evaluate_interval, individual_patterns, load_report, ModelKind, ModelScore, PredictReport, ACYCLIC_SET,
    BASELINE_SET, CENTRALITY_SET, LOOP_SET,
};
pub use report::{cmd_report, render_report};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Synth,
    Ingest,
    Analyze,
    Predict,
    Calibrate,
    Report,
}

/// Runs `command` under `root` on a thread pool capped at `config.threads`
/// (0 lets rayon decide).
pub fn run(command: Command, config: &RunConfig, root: &Path) -> Result<RunManifest> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match command {
        Command::Synth => cmd_synth(config, &root.join("synth")),
        Command::Ingest => cmd_ingest(config, root),
        Command::Analyze => cmd_analyze(config, root),
        Command::Predict => cmd_predict(config, root),
        Command::Calibrate => cmd_calibrate(config, root),
        Command::Report => cmd_report(config, root),
    })
}
