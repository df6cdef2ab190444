//! `synth`: seeded synthetic corpus with ground truth, optionally with a
//! planted linear relation between a pattern count and `|E^{N_inhib}|`.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::manifest::{num, opt_num, OutputDir, RunManifest};
use crate::cascade::{classify_cascade_type, growth_curve, CascadeType, DiffusionNetwork, UserId, UserRegistry};
use crate::error::{Error, Result};
use crate::lifecycle::{detect_lifecycle, HawkesConfig, InhibitionThresholds};
use crate::motif::{motif_census, CensusMode, PatternId};
use crate::synth::{synthesize_cascade, GrowthShape, SynthCascade, SynthParams};
use crate::windows::{window_of_time, TemporalSeries};

/// The relation `|E^{N_inhib}| = round(intercept + slope * MC + noise)`, MC
/// being the planted pattern's count in `N_{inhib-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedRelation {
    pub pattern: PatternId,
    pub intercept: f64,
    pub slope: f64,
    pub noise_sd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedCascade {
    /// Pattern count in `N_{inhib-1}`.
    pub predictor: u64,
    pub noise: f64,
    pub edges_before: usize,
    pub target_edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthEntry {
    pub cascade_id: String,
    pub shape: GrowthShape,
    pub params: SynthParams,
    pub attempts: usize,
    pub true_midpoint: f64,
    /// Window holding the growth midpoint.
    pub true_steep_window: Option<usize>,
    pub t_steep: f64,
    /// Inhibition time under the configured thresholds.
    pub t_inhib: Option<f64>,
    pub steep_network: Option<usize>,
    pub inhib_network: Option<usize>,
    pub planted: Option<PlantedCascade>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub window_size: usize,
    pub hawkes: HawkesConfig<f64>,
    pub thresholds: InhibitionThresholds,
    pub relation: Option<PlantedRelation>,
    pub cascades: Vec<TruthEntry>,
}

struct Generated {
    synth: SynthCascade,
    users: UserRegistry,
    truth: TruthEntry,
}

fn expected_type(shape: GrowthShape) -> CascadeType {
    match shape {
        GrowthShape::TypeI => CascadeType::TypeI,
        GrowthShape::TypeII => CascadeType::TypeII,
        GrowthShape::TypeIII => CascadeType::TypeIII,
    }
}

fn draw_params(config: &RunConfig, rng: &mut ChaCha8Rng) -> SynthParams {
    let s = &config.synth;
    let range = |r: [f64; 2], rng: &mut ChaCha8Rng| if r[0] < r[1] { rng.random_range(r[0]..r[1]) } else { r[0] };
    let n_participants = rng.random_range(s.participants[0]..=s.participants[1]);
    let rate = range(s.rate, rng);
    let rm = range(s.rate_midpoint, rng);
    let historical_edge_prob = range(s.historical_prob, rng);
    let total: f64 = s.shape_mix.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut shape = GrowthShape::TypeIII;
    for (w, sh) in s.shape_mix.iter().zip([GrowthShape::TypeI, GrowthShape::TypeII, GrowthShape::TypeIII]) {
        if u < *w {
            shape = sh;
            break;
        }
        u -= w;
    }
    SynthParams {
        n_participants,
        logistic_midpoint: rm / rate,
        logistic_rate: rate,
        historical_edge_prob,
        shape,
        coactivity_span: s.coactivity_span,
    }
}

/// Rewires historical edges touching window `inhib_window` so that
/// `N_inhib` gets exactly `target` edges. Earlier networks are untouched.
fn adjust_inhib_network(
    series: &TemporalSeries,
    inhib: usize,
    overlay: &mut DiffusionNetwork,
    target: usize,
    rng: &mut ChaCha8Rng,
) -> bool {
    let net = series.get(inhib).expect("inhibition network exists");
    let late: HashSet<UserId> = series.windows[inhib].nodes.iter().copied().collect();
    let nodes = net.nodes();
    let current = net.edge_count();
    let mut present = Vec::new();
    let mut absent = Vec::new();
    for a in 0..nodes.len() {
        for b in (a + 1)..nodes.len() {
            let (u, v) = (nodes[a], nodes[b]);
            if !late.contains(&u) && !late.contains(&v) {
                continue;
            }
            match net.tag(a as u32, b as u32) {
                Some(crate::windows::EdgeTag::Cascade) => {}
                Some(crate::windows::EdgeTag::Historical) => present.push((u, v)),
                None => absent.push((u, v)),
            }
        }
    }
    if target >= current {
        let need = target - current;
        if need > absent.len() {
            return false;
        }
        absent.shuffle(rng);
        for &(u, v) in &absent[..need] {
            overlay.insert(u, v);
        }
    } else {
        let need = current - target;
        if need > present.len() {
            return false;
        }
        present.shuffle(rng);
        for &(u, v) in &present[..need] {
            overlay.remove(u, v);
        }
    }
    true
}

fn generate_one(index: usize, config: &RunConfig, relation: Option<&PlantedRelation>) -> Result<Generated> {
    let id = format!("c{index:04}");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64 + 1);
    let hawkes = config.hawkes.to_config();
    let thresholds = config.inhibition.thresholds();
    let w = config.windows.size;

    for attempt in 1..=config.synth.max_attempts {
        let params = draw_params(config, &mut rng);
        let seed = rng.random::<u64>();
        let mut users = UserRegistry::new();
        let mut synth = synthesize_cascade(&id, &params, &mut users, seed)?;
        let series = TemporalSeries::build(&synth.cascade, w, &synth.overlay)?;
        let life = detect_lifecycle(&synth.cascade, &series.windows, &synth.overlay, &hawkes, &thresholds)?;

        if config.synth.require_type_match {
            let ty = classify_cascade_type(&growth_curve(&synth.cascade), &config.classify).ok();
            if ty != Some(expected_type(params.shape)) {
                continue;
            }
        }
        let min_inhib = if relation.is_some() { 3 } else { 1 };
        if config.synth.require_inhibition && life.indices.is_none_or(|ix| ix.inhib_network < min_inhib) {
            continue;
        }

        let mut planted = None;
        if let (Some(rel), Some(ix)) = (relation, life.indices) {
            if ix.inhib_network < 3 {
                continue;
            }
            let i = ix.inhib_network;
            let prev = series.get(i - 1).expect("network before inhibition");
            let predictor = motif_census(prev.graph(), rel.pattern.k(), CensusMode::CountOnly)?.count(rel.pattern);
            let noise = rel.noise_sd * rng.sample::<f64, _>(StandardNormal);
            let value = (rel.intercept + rel.slope * predictor as f64 + noise).round();
            if value < 0.0 {
                continue;
            }
            let target = value as usize;
            let edges_before = series.get(i).expect("inhibition network").edge_count();
            if !adjust_inhib_network(&series, i, &mut synth.overlay, target, &mut rng) {
                continue;
            }
            let rebuilt = TemporalSeries::build(&synth.cascade, w, &synth.overlay)?;
            let again = detect_lifecycle(&synth.cascade, &rebuilt.windows, &synth.overlay, &hawkes, &thresholds)?;
            let check = motif_census(rebuilt.get(i - 1).expect("network").graph(), rel.pattern.k(), CensusMode::CountOnly)?;
            if again.indices != life.indices
                || rebuilt.get(i).map(|n| n.edge_count()) != Some(target)
                || check.count(rel.pattern) != predictor
            {
                continue;
            }
            planted = Some(PlantedCascade {
                predictor,
                noise,
                edges_before,
                target_edges: target,
            });
        }

        let truth = TruthEntry {
            cascade_id: id.clone(),
            shape: params.shape,
            true_steep_window: window_of_time(&series.windows, synth.true_midpoint),
            true_midpoint: synth.true_midpoint,
            params,
            attempts: attempt,
            t_steep: life.t_steep,
            t_inhib: life.t_inhib,
            steep_network: life.indices.map(|ix| ix.steep_network),
            inhib_network: life.indices.map(|ix| ix.inhib_network),
            planted,
        };
        return Ok(Generated { synth, users, truth });
    }
    Err(Error::Data(format!(
        "cascade {id}: no draw met the generator requirements in {} attempts",
        config.synth.max_attempts
    )))
}

/// Generates the corpus into `dir`: `cascades.csv`, `diffusion.csv`,
/// `labels.csv` and `ground_truth.json`.
pub fn cmd_synth(config: &RunConfig, dir: &Path) -> Result<RunManifest> {
    let mut manifest = RunManifest::new("synth", config);
    let mut out = OutputDir::create(dir.to_path_buf())?;
    let relation = config
        .synth
        .planted_pattern
        .as_deref()
        .map(|label| -> Result<PlantedRelation> {
            Ok(PlantedRelation {
                pattern: label.parse()?,
                intercept: config.synth.planted_intercept,
                slope: config.synth.planted_slope,
                noise_sd: config.synth.planted_noise,
            })
        })
        .transpose()?;

    let generated = manifest.time("generate", |_| {
        (0..config.synth.n_cascades)
            .into_par_iter()
            .map(|i| generate_one(i, config, relation.as_ref()))
            .collect::<Result<Vec<_>>>()
    })?;

    manifest.time("write", |m| {
        let mut log = out.csv("cascades.csv")?;
        log.row(["cascade_id", "source", "target", "time"])?;
        let mut edges: Vec<(String, String)> = Vec::new();
        for g in &generated {
            for e in g.synth.cascade.events() {
                log.row([g.synth.cascade.id(), g.users.name(e.source), g.users.name(e.target), &num(e.time)])?;
            }
            for (u, v) in g.synth.overlay.sorted_edges() {
                let (a, b) = (g.users.name(u).to_owned(), g.users.name(v).to_owned());
                edges.push(if a <= b { (a, b) } else { (b, a) });
            }
        }
        log.finish()?;
        edges.sort_unstable();
        let mut diff = out.csv("diffusion.csv")?;
        diff.row(["u", "v"])?;
        for (a, b) in &edges {
            diff.row([a, b])?;
        }
        diff.finish()?;

        let mut labels = out.csv("labels.csv")?;
        labels.row(["cascade_id", "t_inhib"])?;
        for g in &generated {
            labels.row([g.truth.cascade_id.clone(), opt_num(g.truth.t_inhib)])?;
        }
        labels.finish()?;

        let truth = GroundTruth {
            seed: config.seed,
            window_size: config.windows.size,
            hawkes: config.hawkes.to_config(),
            thresholds: config.inhibition.thresholds(),
            relation: relation.clone(),
            cascades: generated.iter().map(|g| g.truth.clone()).collect(),
        };
        out.json("ground_truth.json", &truth)?;
        m.detail("cascades", generated.len())?;
        m.detail("historical_edges", edges.len())?;
        m.warn("extra_attempts", generated.iter().map(|g| g.truth.attempts as u64 - 1).sum());
        Ok(())
    })?;
    out.finish(manifest)
}
