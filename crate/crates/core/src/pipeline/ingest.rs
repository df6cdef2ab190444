//! `ingest`: parse, filter and classify raw inputs into the corpus cache.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::RunConfig;
use super::corpus::{Corpus, CorpusEntry};
use super::manifest::{num, OutputDir, RunManifest};
use crate::cascade::{
    build_corating_cascades, classify_fits, curve_fits, filter_by_size, growth_curve, parse_cascade_log, parse_diffusion_edges,
    parse_ratings, CurveFits, DiffusionNetwork, UserRegistry,
};
use crate::error::{Error, Result};

pub const CORPUS_FILE: &str = "corpus.json";

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Input paths: explicit config values win, otherwise the files a previous
/// `synth` left under `root`.
pub fn resolve_inputs(config: &RunConfig, root: &Path) -> Result<(Option<PathBuf>, Option<PathBuf>, Option<PathBuf>)> {
    let input = &config.input;
    if input.cascades.is_some() || input.ratings.is_some() {
        return Ok((input.cascades.clone(), input.ratings.clone(), input.diffusion.clone()));
    }
    let synth = root.join("synth");
    let log = synth.join("cascades.csv");
    if log.exists() {
        let diff = synth.join("diffusion.csv");
        let diffusion = input.diffusion.clone().or_else(|| diff.exists().then_some(diff));
        return Ok((Some(log), None, diffusion));
    }
    Err(Error::Config(format!(
        "no input: set input.cascades or input.ratings, or run synth into {}",
        root.display()
    )))
}

pub fn cmd_ingest(config: &RunConfig, root: &Path) -> Result<RunManifest> {
    let mut manifest = RunManifest::new("ingest", config);
    let (cascades_path, ratings_path, diffusion_path) = resolve_inputs(config, root)?;
    let mut users = UserRegistry::new();

    let cascades = manifest.time("parse", |m| {
        let cascades = if let Some(path) = &cascades_path {
            m.detail("cascades", path)?;
            parse_cascade_log(open(path)?, &path.display().to_string(), &mut users)?
        } else {
            let path = ratings_path.as_ref().expect("ratings path");
            m.detail("ratings", path)?;
            let ratings = parse_ratings(open(path)?, &path.display().to_string(), &mut users)?;
            build_corating_cascades(&ratings, config.input.corating_window_hours)?
        };
        Ok(cascades)
    })?;
    let diffusion = manifest.time("parse", |m| match &diffusion_path {
        Some(path) => {
            m.detail("diffusion", path)?;
            let parsed = parse_diffusion_edges(open(path)?, &path.display().to_string(), &mut users)?;
            m.warn("diffusion_self_loops", parsed.self_loops_dropped as u64);
            Ok(parsed.network)
        }
        None => Ok(DiffusionNetwork::new()),
    })?;

    let total = cascades.len();
    let kept = filter_by_size(cascades, config.input.min_participants);
    manifest.detail("cascades_read", total)?;
    manifest.detail("cascades_kept", kept.len())?;

    let classified: Vec<(CorpusEntry, Option<CurveFits>)> = manifest.time("classify", |_| {
        Ok(kept
            .into_par_iter()
            .map(|cascade| {
                let fits = curve_fits(&growth_curve(&cascade), &config.classify);
                if let Err(e) = &fits {
                    log::warn!("cascade {}: {e}", cascade.id());
                }
                let fits = fits.ok();
                let cascade_type = fits.as_ref().map(|f| classify_fits(f, &config.classify));
                (CorpusEntry { cascade, cascade_type }, fits)
            })
            .collect())
    })?;
    manifest.warn(
        "unclassified",
        classified.iter().filter(|(e, _)| e.cascade_type.is_none()).count() as u64,
    );

    let mut out = OutputDir::create(root.join("ingest"))?;
    let mut types = out.csv("types.csv")?;
    types.row([
        "cascade_id",
        "participants",
        "events",
        "lifetime",
        "type",
        "steep_fraction",
        "line_rms",
        "concave_rms",
        "logistic_rms",
    ])?;
    for (e, fits) in &classified {
        let c = &e.cascade;
        let mut row = vec![
            c.id().to_owned(),
            c.size().to_string(),
            c.events().len().to_string(),
            num(c.lifetime()),
            e.cascade_type.map(|t| t.to_string()).unwrap_or_default(),
        ];
        match fits {
            Some(f) => row.extend([f.steep_fraction, f.line_rms, f.concave_rms, f.logistic_rms].map(num)),
            None => row.extend(std::iter::repeat_n(String::new(), 4)),
        }
        types.row(row)?;
    }
    types.finish()?;

    let corpus = Corpus {
        users,
        entries: classified.into_iter().map(|(e, _)| e).collect(),
        diffusion,
    };
    let path = out.path(CORPUS_FILE)?;
    let digest = manifest.time("write", |_| corpus.save(&path))?;
    manifest.detail("corpus_digest", digest)?;
    manifest.detail("users", corpus.users.len())?;
    manifest.detail("diffusion_edges", corpus.diffusion.edge_count())?;
    out.finish(manifest)
}

/// Loads the cache named in the config or the one `ingest` wrote.
pub fn load_corpus(config: &RunConfig, root: &Path) -> Result<Corpus> {
    let path = config
        .input
        .corpus
        .clone()
        .unwrap_or_else(|| root.join("ingest").join(CORPUS_FILE));
    Corpus::load(&path)
}
