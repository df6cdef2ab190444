//! `calibrate`: fit the inhibition thresholds to labeled inhibition times.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::corpus::Corpus;
use super::ingest::load_corpus;
use super::manifest::{OutputDir, RunManifest};
use crate::error::{Error, Result};
use crate::lifecycle::{
    calibrate_thresholds, detect_steep, hawkes_intensity, interval_intensity_curve, steep_time, Calibration, CalibrationCase,
};
use crate::windows::{partition_subsequences, Subsequence};

/// Parses `cascade_id,t_inhib`; an empty time means "never inhibits".
pub fn parse_labels<R: Read>(input: R, source_name: &str) -> Result<BTreeMap<String, Option<f64>>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != ["cascade_id", "t_inhib"] {
        return Err(Error::Parse {
            source_name: source_name.to_owned(),
            line: 1,
            message: format!("expected header \"cascade_id,t_inhib\", found {:?}", header.join(",")),
        });
    }
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |message: String| Error::Parse {
            source_name: source_name.to_owned(),
            line,
            message,
        };
        if record.len() != 2 || record[0].is_empty() {
            return Err(err(format!("expected 2 fields with a cascade id, found {}", record.len())));
        }
        let t = match &record[1] {
            "" => None,
            raw => Some(
                raw.parse::<f64>()
                    .ok()
                    .filter(|t| t.is_finite())
                    .ok_or_else(|| err(format!("time {raw:?} is not a finite number")))?,
            ),
        };
        if out.insert(record[0].to_owned(), t).is_some() {
            return Err(err(format!("duplicate label for cascade {:?}", &record[0])));
        }
    }
    Ok(out)
}

pub fn read_labels(path: &Path) -> Result<BTreeMap<String, Option<f64>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_labels(BufReader::new(file), &path.display().to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    pub calibration: Calibration,
    pub labeled: usize,
    /// Labels naming cascades missing from the corpus.
    pub unmatched: usize,
}

/// Calibrates on every corpus cascade that has a label.
pub fn calibrate_from_labels(
    config: &RunConfig,
    corpus: &Corpus,
    labels: &BTreeMap<String, Option<f64>>,
) -> Result<CalibrationOutcome> {
    let hawkes = config.hawkes.to_config();
    let prepared: Vec<(usize, Vec<Subsequence>, f64, Option<f64>)> = corpus
        .entries
        .par_iter()
        .enumerate()
        .filter_map(|(i, e)| labels.get(e.cascade.id()).map(|&t| (i, e, t)))
        .map(|(i, e, t_inhib)| {
            let windows = partition_subsequences(&e.cascade, config.windows.size)?;
            let intensities = hawkes_intensity(&e.cascade, &hawkes, &corpus.diffusion)?;
            let steep = detect_steep(&interval_intensity_curve(&intensities, &windows))?;
            let t_steep = steep_time(&intensities, &windows, steep.index)
                .ok_or_else(|| Error::Lifecycle(format!("cascade {}: empty steep window", e.cascade.id())))?;
            Ok((i, windows, t_steep, t_inhib))
        })
        .collect::<Result<_>>()?;
    let cases: Vec<CalibrationCase<'_>> = prepared
        .iter()
        .map(|(i, windows, t_steep, t_inhib)| CalibrationCase {
            cascade: &corpus.entries[*i].cascade,
            windows,
            t_steep: *t_steep,
            t_inhib: *t_inhib,
        })
        .collect();
    let calibration = calibrate_thresholds(&cases, &config.inhibition.grid())?;
    Ok(CalibrationOutcome {
        calibration,
        labeled: cases.len(),
        unmatched: labels.len() - cases.len(),
    })
}

fn labels_path(config: &RunConfig, root: &Path) -> Result<PathBuf> {
    if let Some(p) = &config.inhibition.labels {
        return Ok(p.clone());
    }
    let p = root.join("synth").join("labels.csv");
    if p.exists() {
        Ok(p)
    } else {
        Err(Error::Config("no labels: set inhibition.labels".into()))
    }
}

pub fn cmd_calibrate(config: &RunConfig, root: &Path) -> Result<RunManifest> {
    let mut manifest = RunManifest::new("calibrate", config);
    let path = labels_path(config, root)?;
    let labels = read_labels(&path)?;
    let corpus = manifest.time("load", |_| load_corpus(config, root))?;
    let outcome = manifest.time("calibrate", |_| calibrate_from_labels(config, &corpus, &labels))?;
    manifest.detail("labels", &path)?;
    manifest.warn("unmatched_labels", outcome.unmatched as u64);
    let mut out = OutputDir::create(root.join("calibrate"))?;
    out.json("calibration.json", &outcome)?;
    out.finish(manifest)
}
