//! `analyze`: per-cascade lifecycle, censuses, z-scores, transitions and
//! centralities, plus cross-cascade distributions for box plots.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::calibrate::{calibrate_from_labels, read_labels};
use super::config::RunConfig;
use super::corpus::{Corpus, CorpusEntry};
use super::ingest::load_corpus;
use super::manifest::{num, opt_num, CascadeFailure, LifecycleEntry, OutputDir, RunManifest};
use crate::cascade::CascadeType;
use crate::error::{Error, Result};
use crate::lifecycle::{detect_lifecycle, InhibitionThresholds};
use crate::motif::{pattern_catalog, PatternId};
use crate::prediction::{centrality_summary, CascadeAnalysis, NetworkRecord, CENTRALITY_NAMES};
use crate::scalar::quantile;
use crate::significance::{build_ensemble, zscore_report, SignificanceReport};
use crate::transitions::{CensusCache, TransitionMatrix, TransitionThresholds};
use crate::windows::{write_network_edges, TemporalSeries};

pub const ANALYSIS_FILE: &str = "analysis.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CascadeStatus {
    Analysed,
    NoInhibition,
    ExcludedType,
    Unclassified,
    Failed,
}

impl CascadeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CascadeStatus::Analysed => "analysed",
            CascadeStatus::NoInhibition => "no_inhibition",
            CascadeStatus::ExcludedType => "excluded_type",
            CascadeStatus::Unclassified => "unclassified",
            CascadeStatus::Failed => "failed",
        }
    }
}

struct Outcome {
    cascade_id: String,
    cascade_type: Option<CascadeType>,
    status: CascadeStatus,
    error: Option<String>,
    lifecycle: Option<LifecycleEntry>,
    analysis: Option<CascadeAnalysis>,
    zscores: Vec<(usize, SignificanceReport<f64>)>,
    transitions: Vec<TransitionMatrix>,
    short_null_members: u64,
    dumps: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn bare(entry: &CorpusEntry, status: CascadeStatus) -> Self {
        Outcome {
            cascade_id: entry.cascade.id().to_owned(),
            cascade_type: entry.cascade_type,
            status,
            error: None,
            lifecycle: None,
            analysis: None,
            zscores: Vec::new(),
            transitions: Vec::new(),
            short_null_members: 0,
            dumps: Vec::new(),
        }
    }
}

/// Networks `max(1, anchor - last)..anchor`.
pub fn networks_before(anchor: usize, last: usize) -> std::ops::Range<usize> {
    anchor.saturating_sub(last).max(1)..anchor.max(1)
}

fn ensemble_seed(seed: u64, cascade: &str, network: usize, k: usize) -> u64 {
    let h = Sha256::digest(format!("{seed}/{cascade}/{network}/{k}").as_bytes());
    u64::from_le_bytes(h[..8].try_into().expect("8 bytes"))
}

/// File-system friendly directory name for a cascade id.
pub fn cascade_dir(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

struct Shared<'a> {
    config: &'a RunConfig,
    corpus: &'a Corpus,
    thresholds: InhibitionThresholds,
    transition_thresholds: TransitionThresholds,
}

fn analyze_cascade(entry: &CorpusEntry, ctx: &Shared<'_>, out: &mut Outcome) -> Result<()> {
    let config = ctx.config;
    let cascade = &entry.cascade;
    let id = cascade.id();
    let series = TemporalSeries::build(cascade, config.windows.size, &ctx.corpus.diffusion)?;
    let life = detect_lifecycle(
        cascade,
        &series.windows,
        &ctx.corpus.diffusion,
        &config.hawkes.to_config(),
        &ctx.thresholds,
    )?;
    out.lifecycle = Some(LifecycleEntry {
        cascade_id: id.to_owned(),
        windows: series.window_count(),
        steep_window: life.steep.index,
        steep_fallback: life.steep.fallback,
        t_steep: life.t_steep,
        inhib_window: life.indices.map(|ix| ix.inhib_window),
        t_inhib: life.t_inhib,
        steep_network: life.indices.map(|ix| ix.steep_network),
        inhib_network: life.indices.map(|ix| ix.inhib_network),
        dropped_reshare_edges: series.dropped_reshare_edges,
    });

    if config.windows.dump_networks {
        let dir = format!("cascades/{}/networks", cascade_dir(id));
        for net in &series.networks {
            let mut buf = Vec::new();
            write_network_edges(&mut buf, net, &ctx.corpus.users)?;
            out.dumps.push((format!("{dir}/N_{}.csv", net.index()), buf));
        }
        let meta = serde_json::json!({
            "windows": series.windows.iter().map(|w| serde_json::json!({
                "index": w.index, "start": w.start, "end": w.end, "participants": w.nodes.len(),
            })).collect::<Vec<_>>(),
            "lifecycle": life.indices,
            "dropped_reshare_edges": series.dropped_reshare_edges,
        });
        let mut buf = serde_json::to_vec_pretty(&meta)?;
        buf.push(b'\n');
        out.dumps.push((format!("{dir}/networks.json"), buf));
    }

    let Some(ix) = life.indices else {
        out.status = CascadeStatus::NoInhibition;
        return Ok(());
    };
    let (steep, inhib) = (ix.steep_network, ix.inhib_network);
    let last = config.motifs.last_networks;
    let mut transition_set: BTreeSet<usize> = ((steep + 1).max(2)..=inhib).collect();
    transition_set.extend(networks_before(inhib, last).filter(|&i| i >= 2));
    let mut record_set: BTreeSet<usize> = networks_before(inhib, last).chain(networks_before(steep, last)).collect();
    record_set.extend(&transition_set);

    let mut cache = CensusCache::new(&series);
    let mut networks = BTreeMap::new();
    for &i in &record_set {
        let net = cache.network(i)?;
        let mut census = BTreeMap::new();
        for &k in &config.motifs.sizes {
            let c = cache.get(i, k)?;
            census.extend(c.dense_counts());
        }
        networks.insert(
            i,
            NetworkRecord {
                index: i,
                edges: net.edge_count(),
                census,
                transitions_in: None,
                transition_pairs: None,
                centrality: centrality_summary(net.graph()),
            },
        );
    }
    for &i in &transition_set {
        let m = cache.transition(i, &ctx.transition_thresholds, config.transitions.induced)?;
        let rec = networks.get_mut(&i).expect("transition networks are recorded");
        let mut sums = BTreeMap::new();
        for p5 in pattern_catalog(5)? {
            sums.insert(*p5, m.column_sum(*p5));
        }
        rec.transitions_in = Some(sums);
        rec.transition_pairs = Some(m.entries.iter().filter(|(_, &c)| c > 0).map(|(&(a, b), &c)| (a, b, c)).collect());
        out.transitions.push(m);
    }

    let sig = &config.significance;
    if sig.enabled {
        for i in networks_before(inhib, sig.networks) {
            for &k in &sig.sizes {
                let graph = cache.network(i)?.graph();
                let ensemble = build_ensemble(
                    graph,
                    sig.ensemble_size,
                    sig.switches_per_edge,
                    k,
                    ensemble_seed(config.seed, id, i, k),
                )?;
                out.short_null_members += ensemble.short_members() as u64;
                let report = zscore_report(cache.get(i, k)?, &ensemble, sig.std)?;
                out.zscores.push((i, report));
            }
        }
    }

    out.analysis = Some(CascadeAnalysis {
        cascade_id: id.to_owned(),
        cascade_type: entry.cascade_type.expect("analysed cascades are classified"),
        steep_network: steep,
        inhib_network: inhib,
        target_edges: cache.network(inhib)?.edge_count(),
        networks,
    });
    out.status = CascadeStatus::Analysed;
    Ok(())
}

fn run_one(entry: &CorpusEntry, ctx: &Shared<'_>) -> Outcome {
    let Some(ty) = entry.cascade_type else {
        return Outcome::bare(entry, CascadeStatus::Unclassified);
    };
    if !ctx.config.analyze.types.contains(&ty) {
        return Outcome::bare(entry, CascadeStatus::ExcludedType);
    }
    let mut out = Outcome::bare(entry, CascadeStatus::Failed);
    if let Err(e) = analyze_cascade(entry, ctx, &mut out) {
        log::warn!("cascade {}: {e}", entry.cascade.id());
        out.status = CascadeStatus::Failed;
        out.error = Some(e.to_string());
        out.analysis = None;
    }
    out
}

/// Median and quartiles of `values`.
fn spread(values: &[f64]) -> [String; 4] {
    let q = |p| opt_num(quantile(values, p));
    [values.len().to_string(), q(0.5), q(0.25), q(0.75)]
}

pub fn cmd_analyze(config: &RunConfig, root: &Path) -> Result<RunManifest> {
    let mut manifest = RunManifest::new("analyze", config);
    let max_st = config.prediction.st.iter().copied().max().unwrap_or(0);
    if config.motifs.last_networks < max_st + 1 {
        log::warn!(
            "motifs.last_networks = {} leaves features for st = {max_st} missing",
            config.motifs.last_networks
        );
        manifest.warn("short_feature_range", 1);
    }
    let corpus = manifest.time("load", |_| load_corpus(config, root))?;

    let thresholds = match &config.inhibition.labels {
        Some(path) => {
            let labels = read_labels(path)?;
            let outcome = manifest.time("calibrate", |_| calibrate_from_labels(config, &corpus, &labels))?;
            manifest.detail("calibration", &outcome)?;
            outcome.calibration.thresholds
        }
        None => config.inhibition.thresholds(),
    };
    manifest.detail("thresholds", thresholds)?;
    let ctx = Shared {
        config,
        corpus: &corpus,
        thresholds,
        transition_thresholds: config.transitions.thresholds()?,
    };

    let mut outcomes: Vec<Outcome> =
        manifest.time("cascades", |_| Ok(corpus.entries.par_iter().map(|e| run_one(e, &ctx)).collect()))?;
    outcomes.sort_by(|a, b| a.cascade_id.cmp(&b.cascade_id));

    let mut out = OutputDir::create(root.join("analyze"))?;
    manifest.time("write", |m| write_outputs(config, &outcomes, &mut out, m))?;

    let attempted = outcomes
        .iter()
        .filter(|o| !matches!(o.status, CascadeStatus::ExcludedType | CascadeStatus::Unclassified))
        .count();
    let failed = manifest.failures.len();
    let manifest = out.finish(manifest)?;
    if attempted > 0 && failed as f64 / attempted as f64 > config.analyze.max_failure_fraction {
        return Err(Error::Analysis(format!(
            "{failed} of {attempted} cascades failed, above the tolerated fraction {}",
            config.analyze.max_failure_fraction
        )));
    }
    Ok(manifest)
}

fn write_outputs(config: &RunConfig, outcomes: &[Outcome], out: &mut OutputDir, m: &mut RunManifest) -> Result<()> {
    let mut life = out.csv("lifecycle.csv")?;
    life.row([
        "cascade_id",
        "type",
        "status",
        "windows",
        "steep_window",
        "steep_fallback",
        "t_steep",
        "inhib_window",
        "t_inhib",
        "steep_network",
        "inhib_network",
        "target_edges",
        "dropped_reshare_edges",
    ])?;
    let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
    for o in outcomes {
        let l = o.lifecycle.as_ref();
        life.row([
            o.cascade_id.clone(),
            o.cascade_type.map(|t| t.to_string()).unwrap_or_default(),
            o.status.as_str().to_owned(),
            opt(l.map(|l| l.windows)),
            opt(l.map(|l| l.steep_window)),
            l.map(|l| l.steep_fallback.to_string()).unwrap_or_default(),
            opt_num(l.map(|l| l.t_steep)),
            opt(l.and_then(|l| l.inhib_window)),
            opt_num(l.and_then(|l| l.t_inhib)),
            opt(l.and_then(|l| l.steep_network)),
            opt(l.and_then(|l| l.inhib_network)),
            opt(o.analysis.as_ref().map(|a| a.target_edges)),
            opt(l.map(|l| l.dropped_reshare_edges)),
        ])?;
        if let Some(l) = l {
            m.lifecycle.push(l.clone());
            m.warn("steep_fallback", l.steep_fallback as u64);
            m.warn("dropped_reshare_edges", l.dropped_reshare_edges as u64);
        }
        if let Some(e) = &o.error {
            m.failures.push(CascadeFailure {
                cascade_id: o.cascade_id.clone(),
                error: e.clone(),
            });
        }
        m.warn(o.status.as_str(), (o.status != CascadeStatus::Analysed) as u64);
        m.warn("short_null_members", o.short_null_members);
    }
    life.finish()?;

    for o in outcomes {
        for (name, bytes) in &o.dumps {
            let path = out.path(name)?;
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        let Some(a) = &o.analysis else { continue };
        let dir = format!("cascades/{}", cascade_dir(&a.cascade_id));

        let mut census = out.csv(&format!("{dir}/census.csv"))?;
        census.row(["network_index", "pattern_id", "edge_count", "count"])?;
        for (i, rec) in &a.networks {
            for (p, c) in &rec.census {
                census.row([i.to_string(), p.label(), p.edge_count().to_string(), c.to_string()])?;
            }
        }
        census.finish()?;

        let mut cent = out.csv(&format!("{dir}/centrality.csv"))?;
        let mut header = vec!["network_index"];
        header.extend(CENTRALITY_NAMES);
        cent.row(header)?;
        for (i, rec) in &a.networks {
            let mut row = vec![i.to_string()];
            row.extend(rec.centrality.values().map(num));
            cent.row(row)?;
        }
        cent.finish()?;

        let mut trans = out.csv(&format!("{dir}/transitions.csv"))?;
        trans.row(["pair_index", "pattern4", "pattern5", "count"])?;
        for t in &o.transitions {
            for (&(p4, p5), c) in &t.entries {
                trans.row([t.index.to_string(), p4.label(), p5.label(), c.to_string()])?;
            }
        }
        trans.finish()?;

        if config.significance.enabled {
            let mut z = out.csv(&format!("{dir}/zscores.csv"))?;
            z.row(["network_index", "pattern_id", "input_count", "mean", "std", "z", "p", "significant"])?;
            for (i, report) in &o.zscores {
                for (p, s) in &report.rows {
                    z.row([
                        i.to_string(),
                        p.label(),
                        num(s.input),
                        num(s.mean),
                        num(s.std),
                        num(s.z),
                        num(s.p),
                        s.significant.to_string(),
                    ])?;
                }
            }
            z.finish()?;
        }
    }

    write_summaries(config, outcomes, out)?;

    let analyses: Vec<&CascadeAnalysis> = outcomes.iter().filter_map(|o| o.analysis.as_ref()).collect();
    m.detail("analysed", analyses.len())?;
    out.json(ANALYSIS_FILE, &analyses)
}

fn write_summaries(config: &RunConfig, outcomes: &[Outcome], out: &mut OutputDir) -> Result<()> {
    let last = config.motifs.last_networks;
    let analysed = || outcomes.iter().filter_map(|o| o.analysis.as_ref().map(|a| (o, a)));

    let mut census: BTreeMap<(&str, i64, PatternId), Vec<f64>> = BTreeMap::new();
    let mut cent: BTreeMap<(i64, usize), Vec<f64>> = BTreeMap::new();
    for (_, a) in analysed() {
        for (anchor_name, anchor) in [("inhib", a.inhib_network), ("steep", a.steep_network)] {
            for i in networks_before(anchor, last) {
                let rec = &a.networks[&i];
                let off = i as i64 - anchor as i64;
                for (&p, &c) in &rec.census {
                    census.entry((anchor_name, off, p)).or_default().push(c as f64);
                }
                if anchor_name == "inhib" {
                    for (j, v) in rec.centrality.values().into_iter().enumerate() {
                        cent.entry((off, j)).or_default().push(v);
                    }
                }
            }
        }
    }
    let mut w = out.csv("census_summary.csv")?;
    w.row(["anchor", "offset", "pattern_id", "n", "median", "q1", "q3"])?;
    for ((anchor, off, p), v) in &census {
        let mut row = vec![anchor.to_string(), off.to_string(), p.label()];
        row.extend(spread(v));
        w.row(row)?;
    }
    w.finish()?;

    let mut w = out.csv("centrality_summary.csv")?;
    w.row(["offset", "measure", "n", "median", "q1", "q3"])?;
    for ((off, j), v) in &cent {
        let mut row = vec![off.to_string(), CENTRALITY_NAMES[*j].to_owned()];
        row.extend(spread(v));
        w.row(row)?;
    }
    w.finish()?;

    let mut trans: BTreeMap<(i64, PatternId, PatternId), Vec<f64>> = BTreeMap::new();
    for (o, a) in analysed() {
        for t in &o.transitions {
            for (&(p4, p5), &c) in &t.entries {
                trans
                    .entry((t.index as i64 - a.inhib_network as i64, p4, p5))
                    .or_default()
                    .push(c as f64);
            }
        }
    }
    let mut w = out.csv("transition_summary.csv")?;
    w.row(["offset", "pattern4", "pattern5", "n", "median", "q1", "q3", "total"])?;
    for ((off, p4, p5), v) in &trans {
        let mut row = vec![off.to_string(), p4.label(), p5.label()];
        row.extend(spread(v));
        row.push(num(v.iter().sum()));
        w.row(row)?;
    }
    w.finish()?;

    if config.significance.enabled {
        let mut z: BTreeMap<(i64, PatternId), Vec<f64>> = BTreeMap::new();
        for (o, a) in analysed() {
            for (i, report) in &o.zscores {
                for (p, s) in &report.rows {
                    z.entry((*i as i64 - a.inhib_network as i64, *p)).or_default().push(s.z);
                }
            }
        }
        let mut w = out.csv("zscore_summary.csv")?;
        w.row(["offset", "pattern_id", "n", "median", "q1", "q3"])?;
        for ((off, p), v) in &z {
            let mut row = vec![off.to_string(), p.label()];
            row.extend(spread(v));
            w.row(row)?;
        }
        w.finish()?;
    }
    Ok(())
}

/// Reads the analysis bundle written by [`cmd_analyze`].
pub fn load_analyses(root: &Path) -> Result<Vec<CascadeAnalysis>> {
    super::manifest::read_json(&root.join("analyze").join(ANALYSIS_FILE))
}
