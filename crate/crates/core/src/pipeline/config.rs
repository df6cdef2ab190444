//! Run configuration: a TOML file with one table per stage, plus
//! `section.key=value` overrides from the command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cascade::{CascadeType, ClassifyConfig};
use crate::error::{Error, Result};
use crate::lifecycle::{HawkesConfig, InhibitionThresholds, ThresholdGrid, UserWeighting};
use crate::motif::PatternId;
use crate::prediction::{Penalty, DEFAULT_ETA_GRID};
use crate::significance::StdKind;
use crate::transitions::TransitionThresholds;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
    pub input: InputConfig,
    pub classify: ClassifyConfig,
    pub windows: WindowConfig,
    pub hawkes: HawkesSection,
    pub inhibition: InhibitionSection,
    pub motifs: MotifConfig,
    pub significance: SignificanceConfig,
    pub transitions: TransitionConfig,
    pub analyze: AnalyzeConfig,
    pub prediction: PredictionConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            threads: 0,
            input: InputConfig::default(),
            classify: ClassifyConfig::default(),
            windows: WindowConfig::default(),
            hawkes: HawkesSection::default(),
            inhibition: InhibitionSection::default(),
            motifs: MotifConfig::default(),
            significance: SignificanceConfig::default(),
            transitions: TransitionConfig::default(),
            analyze: AnalyzeConfig::default(),
            prediction: PredictionConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Corpus cache for `analyze` and `calibrate`; defaults to the one
    /// written by `ingest` under the output root.
    pub corpus: Option<PathBuf>,
    /// Cascade log (`cascade_id,source,target,time`).
    pub cascades: Option<PathBuf>,
    /// Historical edges (`u,v`).
    pub diffusion: Option<PathBuf>,
    /// Ratings (`user,item,time_hours`); used instead of a cascade log.
    pub ratings: Option<PathBuf>,
    pub corating_window_hours: f64,
    /// Keep cascades with strictly more participants than this.
    pub min_participants: usize,
}

impl Default for InputConfig {
    fn default() -> Self {
        InputConfig {
            corpus: None,
            cascades: None,
            diffusion: None,
            ratings: None,
            corating_window_hours: 24.0,
            min_participants: 300,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub size: usize,
    /// Write every temporal network's edge list during analysis.
    pub dump_networks: bool,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            size: crate::windows::DEFAULT_WINDOW_SIZE,
            dump_networks: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HawkesSection {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub weighting: UserWeighting,
}

impl Default for HawkesSection {
    fn default() -> Self {
        let d = HawkesConfig::<f64>::default();
        HawkesSection {
            mu: d.mu,
            alpha: d.alpha,
            beta: d.beta,
            weighting: d.weighting,
        }
    }
}

impl HawkesSection {
    pub fn to_config(&self) -> HawkesConfig<f64> {
        HawkesConfig {
            mu: self.mu,
            alpha: self.alpha,
            beta: self.beta,
            weighting: self.weighting,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InhibitionSection {
    pub dtg: f64,
    pub g: f64,
    /// Labels (`cascade_id,t_inhib`) to calibrate `dtg` and `g` from before
    /// analysis; the fixed values are used when absent.
    pub labels: Option<PathBuf>,
    pub dtg_grid: Vec<f64>,
    pub g_grid: Vec<f64>,
}

impl Default for InhibitionSection {
    fn default() -> Self {
        let t = InhibitionThresholds::default();
        let grid = ThresholdGrid::default();
        InhibitionSection {
            dtg: t.dtg,
            g: t.g,
            labels: None,
            dtg_grid: grid.dtg,
            g_grid: grid.g,
        }
    }
}

impl InhibitionSection {
    pub fn thresholds(&self) -> InhibitionThresholds {
        InhibitionThresholds { dtg: self.dtg, g: self.g }
    }

    pub fn grid(&self) -> ThresholdGrid {
        ThresholdGrid {
            dtg: self.dtg_grid.clone(),
            g: self.g_grid.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotifConfig {
    pub sizes: Vec<usize>,
    /// Networks censused before `N_inhib` and before `N_steep`.
    pub last_networks: usize,
}

impl Default for MotifConfig {
    fn default() -> Self {
        MotifConfig {
            sizes: vec![3, 4, 5],
            last_networks: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignificanceConfig {
    pub enabled: bool,
    pub ensemble_size: usize,
    pub switches_per_edge: usize,
    pub sizes: Vec<usize>,
    /// z-scores are computed for this many networks before `N_inhib`.
    pub networks: usize,
    pub std: StdKind,
}

impl Default for SignificanceConfig {
    fn default() -> Self {
        SignificanceConfig {
            enabled: true,
            ensemble_size: 100,
            switches_per_edge: 10,
            sizes: vec![5],
            networks: 5,
            std: StdKind::Population,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionConfig {
    pub induced: bool,
    pub min_count4: u64,
    pub min_count5: u64,
    /// Per-pattern minimum counts keyed by label, e.g. `k5_M07 = 3`.
    pub per_pattern: BTreeMap<String, u64>,
}

impl TransitionConfig {
    pub fn thresholds(&self) -> Result<TransitionThresholds> {
        let per_pattern = self
            .per_pattern
            .iter()
            .map(|(k, &v)| Ok((k.parse::<PatternId>()?, v)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(TransitionThresholds {
            default4: self.min_count4,
            default5: self.min_count5,
            per_pattern,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    /// Cascade types that are analysed; others are skipped and counted.
    pub types: Vec<CascadeType>,
    /// Largest tolerated fraction of failed cascades.
    pub max_failure_fraction: f64,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            types: vec![CascadeType::TypeI],
            max_failure_fraction: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictionConfig {
    pub eta_grid: Vec<f64>,
    pub penalty: Penalty,
    pub st: Vec<usize>,
    pub folds: usize,
    /// Also fit order-2 polynomial models for every individual pattern.
    pub polynomial: bool,
    pub absent_as_missing: bool,
    /// `MT` per `(p4, p5)` pair rather than summed into `p5`.
    pub pair_level_transitions: bool,
    /// Pattern labels for individual models; all 5-node patterns if empty.
    pub patterns: Vec<String>,
}

impl Default for PredictionConfig {
    fn default() -> Self {
        PredictionConfig {
            eta_grid: DEFAULT_ETA_GRID.to_vec(),
            penalty: Penalty::L1,
            st: vec![1, 3, 5, 7, 9],
            folds: 10,
            polynomial: false,
            absent_as_missing: false,
            pair_level_transitions: false,
            patterns: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_cascades: usize,
    pub participants: [usize; 2],
    /// Range of `rate * midpoint`, which sets how early growth peaks.
    pub rate_midpoint: [f64; 2],
    /// Logistic rate range, 1/minute.
    pub rate: [f64; 2],
    pub historical_prob: [f64; 2],
    pub coactivity_span: usize,
    /// Fractions of Type I, II and III shapes.
    pub shape_mix: [f64; 3],
    /// Redraw cascades that never reach inhibition.
    pub require_inhibition: bool,
    /// Redraw cascades whose curve does not classify as the drawn shape.
    pub require_type_match: bool,
    pub max_attempts: usize,
    /// Pattern whose count in `N_{inhib-1}` drives `|E^{N_inhib}|`; no
    /// planting when absent.
    pub planted_pattern: Option<String>,
    pub planted_intercept: f64,
    pub planted_slope: f64,
    pub planted_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_cascades: 30,
            participants: [400, 700],
            rate_midpoint: [0.3, 0.5],
            rate: [0.01, 0.03],
            historical_prob: [0.01, 0.08],
            coactivity_span: 10,
            shape_mix: [1.0, 0.0, 0.0],
            require_inhibition: true,
            require_type_match: true,
            max_attempts: 50,
            planted_pattern: None,
            planted_intercept: 150.0,
            planted_slope: 1.0,
            planted_noise: 2.0,
        }
    }
}

impl RunConfig {
    /// Loads `path` (or defaults), applies overrides, validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.windows.size < 2 {
            return bad(format!("windows.size must be at least 2, got {}", self.windows.size));
        }
        if self.input.min_participants < 1 {
            return bad("input.min_participants must be at least 1".into());
        }
        if !(self.input.corating_window_hours > 0.0) {
            return bad("input.corating_window_hours must be positive".into());
        }
        self.hawkes.to_config().validate()?;
        self.inhibition.thresholds().validate()?;
        if self.inhibition.dtg_grid.is_empty() || self.inhibition.g_grid.is_empty() {
            return bad("inhibition grids must not be empty".into());
        }
        for &k in self.motifs.sizes.iter().chain(&self.significance.sizes) {
            if !(3..=5).contains(&k) {
                return bad(format!("motif size {k} unsupported, expected 3, 4 or 5"));
            }
        }
        if self.significance.enabled && self.significance.ensemble_size < 2 {
            return bad("significance.ensemble_size must be at least 2".into());
        }
        self.transitions.thresholds()?;
        if self.prediction.eta_grid.is_empty() || self.prediction.eta_grid.iter().any(|&e| !(e >= 0.0)) {
            return bad("prediction.eta_grid must be non-empty and non-negative".into());
        }
        if self.prediction.folds < 2 {
            return bad("prediction.folds must be at least 2".into());
        }
        if self.prediction.st.contains(&0) {
            return bad("prediction.st values must be at least 1".into());
        }
        for label in &self.prediction.patterns {
            label.parse::<PatternId>()?;
        }
        let s = &self.synth;
        if s.participants[0] < 2 || s.participants[0] > s.participants[1] {
            return bad("synth.participants must be an increasing range starting at 2 or more".into());
        }
        if !(s.rate[0] > 0.0 && s.rate[0] <= s.rate[1]) || !(s.rate_midpoint[0] >= 0.0 && s.rate_midpoint[0] <= s.rate_midpoint[1]) {
            return bad("synth.rate and synth.rate_midpoint must be increasing positive ranges".into());
        }
        if !(0.0 <= s.historical_prob[0] && s.historical_prob[0] <= s.historical_prob[1] && s.historical_prob[1] <= 1.0) {
            return bad("synth.historical_prob must be an increasing range within [0, 1]".into());
        }
        if s.shape_mix.iter().any(|&f| f < 0.0) || s.shape_mix.iter().sum::<f64>() <= 0.0 {
            return bad("synth.shape_mix needs non-negative weights with a positive sum".into());
        }
        if s.max_attempts == 0 {
            return bad("synth.max_attempts must be at least 1".into());
        }
        if let Some(p) = &s.planted_pattern {
            p.parse::<PatternId>()?;
        }
        if !(s.planted_noise >= 0.0) {
            return bad("synth.planted_noise must be non-negative".into());
        }
        Ok(())
    }
}

/// Applies `a.b.c=value`; the value is parsed as TOML, falling back to a
/// plain string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {spec:?} is not key=value")))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_owned()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?}: {part:?} is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_owned(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        let c = RunConfig::load(None, &[]).unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn overrides_apply() {
        let c = RunConfig::load(
            None,
            &[
                "hawkes.beta=0.2".into(),
                "windows.size=20".into(),
                "prediction.penalty=l2".into(),
                "hawkes.weighting=degree_weighted".into(),
                "synth.planted_pattern=k5_M09".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.hawkes.beta, 0.2);
        assert_eq!(c.windows.size, 20);
        assert_eq!(c.prediction.penalty, Penalty::L2);
        assert_eq!(c.hawkes.weighting, UserWeighting::DegreeWeighted);
        assert_eq!(c.synth.planted_pattern.as_deref(), Some("k5_M09"));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for o in ["windows.size=1", "hawkes.beta=0", "inhibition.g=0.5", "nosuch.key=1", "motifs.sizes=[6]"] {
            let err = RunConfig::load(None, &[o.into()]).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{o}: {err}");
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig::default();
        let text = toml::to_string(&c).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
