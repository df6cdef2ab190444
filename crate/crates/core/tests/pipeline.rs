use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use cascade_motifs::pipeline::{
    cascade_dir, load_analyses, load_corpus, networks_before, read_labels, run, Command, GroundTruth, RunConfig, RunManifest,
    CORPUS_FILE,
};
use cascade_motifs::prediction::{extract_motif_features, FeatureOptions};
use cascade_motifs::scalar::quantile;

fn small(seed: u64) -> RunConfig {
    let mut c = RunConfig { seed, threads: 1, ..Default::default() };
    c.synth.n_cascades = 30;
    c.synth.participants = [310, 420];
    c.significance.ensemble_size = 5;
    c.significance.networks = 2;
    c.motifs.last_networks = 6;
    c.prediction.st = vec![1, 2];
    c
}

fn stages(config: &RunConfig, root: &Path, commands: &[Command]) {
    for &cmd in commands {
        run(cmd, config, root).unwrap_or_else(|e| panic!("{cmd:?}: {e}"));
    }
}

fn rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    csv::Reader::from_path(path)
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

const ALL: [Command; 4] = [Command::Synth, Command::Ingest, Command::Analyze, Command::Predict];

#[test]
fn full_run_writes_every_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(3);
    stages(&config, dir.path(), &ALL);
    stages(&config, dir.path(), &[Command::Calibrate, Command::Report]);
    for f in [
        "synth/cascades.csv",
        "synth/diffusion.csv",
        "synth/labels.csv",
        "synth/ground_truth.json",
        "ingest/corpus.json",
        "ingest/types.csv",
        "analyze/lifecycle.csv",
        "analyze/census_summary.csv",
        "analyze/centrality_summary.csv",
        "analyze/transition_summary.csv",
        "analyze/zscore_summary.csv",
        "analyze/analysis.json",
        "predict/mae_table.csv",
        "predict/predict_report.json",
        "predict/features_st1.csv",
        "calibrate/calibration.json",
        "report/report.md",
    ] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    for stage in ["synth", "ingest", "analyze", "predict", "calibrate", "report"] {
        let m = RunManifest::load(&dir.path().join(stage)).unwrap();
        assert_eq!(m.command, stage);
        assert!(!m.outputs.is_empty());
    }
    let analysed = load_analyses(dir.path()).unwrap();
    assert!(analysed.len() >= 20, "{} analysed", analysed.len());
    for a in &analysed {
        let d = dir.path().join("analyze/cascades").join(cascade_dir(&a.cascade_id));
        for f in ["census.csv", "centrality.csv", "transitions.csv", "zscores.csv"] {
            assert!(d.join(f).is_file(), "{} lacks {f}", a.cascade_id);
        }
    }
}

#[test]
fn cascades_without_inhibition_are_counted_and_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(5);
    config.significance.enabled = false;
    stages(&config, dir.path(), &[Command::Synth, Command::Ingest]);
    // no cascade grows fiftyfold past its steep point
    config.inhibition.g = 50.0;
    run(Command::Analyze, &config, dir.path()).unwrap();
    let m = RunManifest::load(&dir.path().join("analyze")).unwrap();
    let life = rows(&dir.path().join("analyze/lifecycle.csv"));
    let skipped = life.iter().filter(|r| r["status"] == "no_inhibition").count();
    assert!(skipped > 0);
    assert_eq!(m.warnings.get("no_inhibition").copied(), Some(skipped as u64));
    assert!(life.iter().all(|r| r["status"] != "analysed"));
    assert!(load_analyses(dir.path()).unwrap().is_empty());
}

#[test]
fn summary_medians_follow_from_per_cascade_censuses() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(8);
    config.significance.enabled = false;
    stages(&config, dir.path(), &[Command::Synth, Command::Ingest, Command::Analyze]);
    let analyze = dir.path().join("analyze");

    let mut want: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in rows(&analyze.join("lifecycle.csv")).iter().filter(|r| r["status"] == "analysed") {
        let inhib: usize = r["inhib_network"].parse().unwrap();
        let census = rows(&analyze.join("cascades").join(cascade_dir(&r["cascade_id"])).join("census.csv"));
        for c in census {
            let i: usize = c["network_index"].parse().unwrap();
            if networks_before(inhib, config.motifs.last_networks).contains(&i) {
                let off = (i as i64 - inhib as i64).to_string();
                want.entry((off, c["pattern_id"].clone())).or_default().push(c["count"].parse().unwrap());
            }
        }
    }
    let got: Vec<_> = rows(&analyze.join("census_summary.csv")).into_iter().filter(|r| r["anchor"] == "inhib").collect();
    assert_eq!(got.len(), want.len());
    for r in got {
        let v = &want[&(r["offset"].clone(), r["pattern_id"].clone())];
        assert_eq!(r["n"], v.len().to_string());
        let median: f64 = r["median"].parse().unwrap();
        assert_eq!(median, quantile(v, 0.5).unwrap(), "{r:?}");
    }
}

#[test]
fn ingest_and_synth_are_reproducible() {
    let config = small(11);
    let hashes = |root: &Path| {
        stages(&config, root, &[Command::Synth, Command::Ingest]);
        let synth = fs::read(root.join("synth/cascades.csv")).unwrap();
        let m = RunManifest::load(&root.join("ingest")).unwrap();
        (synth, m.outputs[CORPUS_FILE].clone())
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (log_a, corpus_a) = hashes(a.path());
    let (log_b, corpus_b) = hashes(b.path());
    assert_eq!(log_a, log_b);
    assert_eq!(corpus_a, corpus_b);

    let corpus = load_corpus(&config, a.path()).unwrap();
    assert_eq!(corpus.entries.len(), 30);
    let ids: std::collections::BTreeSet<_> = corpus.entries.iter().map(|e| e.cascade.id().to_owned()).collect();
    assert_eq!(ids.len(), 30);

    let other = tempfile::tempdir().unwrap();
    stages(&small(12), other.path(), &[Command::Synth]);
    assert_ne!(fs::read(other.path().join("synth/cascades.csv")).unwrap(), log_a);
}

#[test]
fn synthetic_labels_reach_calibration_intact() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(13);
    stages(&config, dir.path(), &[Command::Synth, Command::Ingest]);
    let truth: GroundTruth = serde_json::from_slice(&fs::read(dir.path().join("synth/ground_truth.json")).unwrap()).unwrap();
    let labels = read_labels(&dir.path().join("synth/labels.csv")).unwrap();
    assert_eq!(labels.len(), truth.cascades.len());
    for t in &truth.cascades {
        assert_eq!(labels[&t.cascade_id], t.t_inhib, "{}", t.cascade_id);
    }
    run(Command::Calibrate, &config, dir.path()).unwrap();
    let outcome: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("calibrate/calibration.json")).unwrap()).unwrap();
    assert_eq!(outcome["labeled"], 30);
    assert_eq!(outcome["unmatched"], 0);
    // the generating thresholds sit on the grid, so some grid point fits every label
    assert_eq!(outcome["calibration"]["window_error"].as_f64(), Some(0.0), "{outcome}");
}

#[test]
fn feature_dump_equals_direct_lookups() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(17);
    config.significance.enabled = false;
    stages(&config, dir.path(), &ALL);
    let analyses = load_analyses(dir.path()).unwrap();
    let dump = rows(&dir.path().join("predict/features_st1.csv"));
    assert_eq!(dump.len(), analyses.len());
    for (row, a) in dump.iter().zip(&analyses) {
        assert_eq!(row["cascade_id"], a.cascade_id);
        assert_eq!(row["target_edges"], a.target_edges.to_string());
        for (p, c) in &a.networks[&(a.inhib_network - 1)].census {
            let key = format!("MC_{p}@inhib-1");
            if let Some(v) = row.get(&key) {
                assert_eq!(v.parse::<f64>().unwrap(), *c as f64, "{key}");
            }
        }
    }
    let catalog = cascade_motifs::motif::pattern_catalog(5).unwrap();
    let x = extract_motif_features(&analyses, catalog, 1, FeatureOptions::default()).unwrap();
    for (r, row) in dump.iter().enumerate() {
        for (c, name) in x.names().iter().enumerate() {
            let want = x.get(r, c).map(|v| v.to_string()).unwrap_or_default();
            assert_eq!(row[name], want, "{name}");
        }
    }
}

#[test]
fn mae_table_is_complete_and_repeatable() {
    let mut config = small(19);
    config.significance.enabled = false;
    let table = |root: &Path| {
        stages(&config, root, &ALL);
        fs::read(root.join("predict/mae_table.csv")).unwrap()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let bytes = table(a.path());
    assert_eq!(bytes, table(b.path()));

    let rows = rows(&a.path().join("predict/mae_table.csv"));
    // 21 individual patterns, two combinations, centrality and baseline per start
    assert_eq!(rows.len(), 25 * config.prediction.st.len());
    for r in &rows {
        let mae: f64 = r["mae"].parse().unwrap();
        assert!(mae.is_finite() && mae >= 0.0, "{r:?}");
        assert!(config.prediction.eta_grid.contains(&r["eta"].parse().unwrap()));
    }
}
