//! `predict`: cross-validated edge-count models for every interval start.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::analyze::load_analyses;
use super::config::RunConfig;
use super::manifest::{num, OutputDir, RunManifest};
use crate::error::{Error, Result};
use crate::motif::{pattern_catalog, PatternId};
use crate::prediction::{
    cross_validate, extract_centrality_features, extract_motif_features, polynomial_features, targets, CascadeAnalysis, CvConfig,
    FeatureMatrix, FeatureOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Individual,
    Polynomial,
    AcyclicCombination,
    LoopCombination,
    Centrality,
    Baseline,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Individual => "individual",
            ModelKind::Polynomial => "polynomial",
            ModelKind::AcyclicCombination => "acyclic_combination",
            ModelKind::LoopCombination => "loop_combination",
            ModelKind::Centrality => "centrality",
            ModelKind::Baseline => "baseline",
        }
    }
}

/// Cross-validated score of one feature set at one interval start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub kind: ModelKind,
    /// Patterns feeding the model, empty for centrality and baseline.
    pub patterns: Vec<PatternId>,
    pub n_features: usize,
    pub mae: f64,
    pub r2: f64,
    pub eta: f64,
    pub fold_maes: Vec<f64>,
}

/// Feature-set name to interval start to score.
pub type PredictReport = BTreeMap<String, BTreeMap<usize, ModelScore>>;

pub const ACYCLIC_SET: &str = "acyclic";
pub const LOOP_SET: &str = "loop_top3";
pub const CENTRALITY_SET: &str = "centrality";
pub const BASELINE_SET: &str = "baseline";

struct Job {
    name: String,
    kind: ModelKind,
    patterns: Vec<PatternId>,
    x: FeatureMatrix<f64>,
}

fn score(job: Job, y: &[f64], cv: &CvConfig<f64>) -> Result<(String, ModelScore)> {
    let r = cross_validate(&job.x, y, cv)?;
    Ok((
        job.name,
        ModelScore {
            kind: job.kind,
            patterns: job.patterns,
            n_features: job.x.n_cols(),
            mae: r.mae,
            r2: r.r2,
            eta: r.eta,
            fold_maes: r.fold_maes,
        },
    ))
}

fn baseline_matrix(analyses: &[CascadeAnalysis]) -> Result<FeatureMatrix<f64>> {
    let mut m = FeatureMatrix::new(Vec::new())?;
    for a in analyses {
        m.push_row(a.cascade_id.clone(), &[])?;
    }
    Ok(m)
}

/// Patterns for the individual models: the configured labels or every
/// 5-node pattern.
pub fn individual_patterns(config: &RunConfig) -> Result<Vec<PatternId>> {
    if config.prediction.patterns.is_empty() {
        Ok(pattern_catalog(5)?.to_vec())
    } else {
        config.prediction.patterns.iter().map(|l| l.parse()).collect()
    }
}

/// Scores every feature set at interval start `st`.
pub fn evaluate_interval(config: &RunConfig, analyses: &[CascadeAnalysis], st: usize) -> Result<BTreeMap<String, ModelScore>> {
    let p = &config.prediction;
    let options = FeatureOptions {
        absent_as_missing: p.absent_as_missing,
        pair_level_transitions: p.pair_level_transitions,
    };
    let cv = CvConfig {
        folds: p.folds,
        seed: config.seed,
        eta_grid: p.eta_grid.clone(),
        penalty: p.penalty,
    };
    let y = targets(analyses);
    let individual = individual_patterns(config)?;

    let mut jobs = Vec::new();
    for &pat in &individual {
        let x = extract_motif_features(analyses, &[pat], st, options)?;
        if p.polynomial {
            jobs.push(Job {
                name: format!("poly2:{pat}"),
                kind: ModelKind::Polynomial,
                patterns: vec![pat],
                x: polynomial_features(&x, 2)?,
            });
        }
        jobs.push(Job {
            name: pat.label(),
            kind: ModelKind::Individual,
            patterns: vec![pat],
            x,
        });
    }
    let acyclic: Vec<PatternId> = pattern_catalog(5)?.iter().copied().filter(|q| q.is_acyclic()).collect();
    jobs.push(Job {
        name: ACYCLIC_SET.to_owned(),
        kind: ModelKind::AcyclicCombination,
        x: extract_motif_features(analyses, &acyclic, st, options)?,
        patterns: acyclic,
    });
    jobs.push(Job {
        name: CENTRALITY_SET.to_owned(),
        kind: ModelKind::Centrality,
        patterns: Vec::new(),
        x: extract_centrality_features(analyses, st)?,
    });
    jobs.push(Job {
        name: BASELINE_SET.to_owned(),
        kind: ModelKind::Baseline,
        patterns: Vec::new(),
        x: baseline_matrix(analyses)?,
    });

    let mut scores: BTreeMap<String, ModelScore> =
        jobs.into_par_iter().map(|j| score(j, &y, &cv)).collect::<Result<_>>()?;

    let mut loops: Vec<(f64, PatternId)> = scores
        .values()
        .filter(|s| s.kind == ModelKind::Individual && !s.patterns[0].is_acyclic())
        .map(|s| (s.mae, s.patterns[0]))
        .collect();
    loops.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let best: Vec<PatternId> = loops.iter().take(3).map(|&(_, q)| q).collect();
    if !best.is_empty() {
        let job = Job {
            name: LOOP_SET.to_owned(),
            kind: ModelKind::LoopCombination,
            x: extract_motif_features(analyses, &best, st, options)?,
            patterns: best,
        };
        let (name, s) = score(job, &y, &cv)?;
        scores.insert(name, s);
    }
    Ok(scores)
}

fn write_feature_dump(out: &mut OutputDir, analyses: &[CascadeAnalysis], st: usize) -> Result<()> {
    let motifs = extract_motif_features(analyses, pattern_catalog(5)?, st, FeatureOptions::default())?;
    let x = motifs.hstack(&extract_centrality_features(analyses, st)?)?;
    let mut w = out.csv(&format!("features_st{st}.csv"))?;
    let mut header = vec!["cascade_id".to_owned(), "target_edges".to_owned()];
    header.extend(x.names().iter().cloned());
    w.row(header)?;
    for (r, a) in analyses.iter().enumerate() {
        let mut row = vec![a.cascade_id.clone(), a.target_edges.to_string()];
        row.extend((0..x.n_cols()).map(|c| x.get(r, c).map(num).unwrap_or_default()));
        w.row(row)?;
    }
    w.finish()
}

pub fn cmd_predict(config: &RunConfig, root: &Path) -> Result<RunManifest> {
    let mut manifest = RunManifest::new("predict", config);
    let analyses = manifest.time("load", |_| load_analyses(root))?;
    if analyses.len() < config.prediction.folds {
        return Err(Error::Evaluation(format!(
            "{} analysed cascades are too few for {}-fold cross-validation",
            analyses.len(),
            config.prediction.folds
        )));
    }
    let mut report: PredictReport = BTreeMap::new();
    for &st in &config.prediction.st {
        let scores = manifest.time("evaluate", |_| evaluate_interval(config, &analyses, st))?;
        for (name, s) in scores {
            report.entry(name).or_default().insert(st, s);
        }
    }

    let mut out = OutputDir::create(root.join("predict"))?;
    out.json("predict_report.json", &report)?;
    let mut table = out.csv("mae_table.csv")?;
    table.row(["feature_set", "kind", "st", "n_features", "mae", "r2", "eta"])?;
    for (name, per_st) in &report {
        for (st, s) in per_st {
            table.row([
                name.clone(),
                s.kind.as_str().to_owned(),
                st.to_string(),
                s.n_features.to_string(),
                num(s.mae),
                num(s.r2),
                num(s.eta),
            ])?;
        }
    }
    table.finish()?;
    for &st in &config.prediction.st {
        write_feature_dump(&mut out, &analyses, st)?;
    }
    manifest.detail("cascades", analyses.len())?;
    out.finish(manifest)
}

pub fn load_report(root: &Path) -> Result<PredictReport> {
    super::manifest::read_json(&root.join("predict").join("predict_report.json"))
}
