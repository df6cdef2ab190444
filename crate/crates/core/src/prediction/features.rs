//! Per-cascade analysis records and the feature rows built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::centrality::{Centralities, CENTRALITY_NAMES};
use super::matrix::FeatureMatrix;
use crate::cascade::CascadeType;
use crate::error::Result;
use crate::motif::{pattern_catalog, PatternId};
use crate::transitions::pattern_subgraph_relation;

/// What the analysis stage records about one temporal network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub index: usize,
    pub edges: usize,
    /// Dense counts for every censused pattern size.
    pub census: BTreeMap<PatternId, u64>,
    /// Column sums of the transition matrix `(N_{index-1}, N_index)`, when
    /// it was computed.
    pub transitions_in: Option<BTreeMap<PatternId, u64>>,
    /// Non-zero entries `(p4, p5, count)` of the same matrix.
    #[serde(default)]
    pub transition_pairs: Option<Vec<(PatternId, PatternId, u64)>>,
    pub centrality: Centralities<f64>,
}

/// Analysis summary of one cascade that reached inhibition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeAnalysis {
    pub cascade_id: String,
    pub cascade_type: CascadeType,
    pub steep_network: usize,
    pub inhib_network: usize,
    /// `|E^{N_inhib}|`, the regression target.
    pub target_edges: usize,
    pub networks: BTreeMap<usize, NetworkRecord>,
}

impl CascadeAnalysis {
    /// The two networks feeding interval start `st`: `N_{inhib-st}` and
    /// `N_{inhib-st-1}`, `None` where the index falls below 1.
    pub fn interval(&self, st: usize) -> [Option<usize>; 2] {
        let at = |back: usize| self.inhib_network.checked_sub(back).filter(|&i| i >= 1);
        [at(st), at(st + 1)]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureOptions {
    /// Treat a zero count as missing instead of as an observed zero.
    pub absent_as_missing: bool,
    /// One `MT` column per `(p4, p5)` pair instead of the column sum into
    /// `p5`.
    pub pair_level_transitions: bool,
}

fn contains(p4: PatternId, p5: PatternId) -> bool {
    pattern_subgraph_relation(p4, p5, false).unwrap_or(false)
}

fn slot_name(slot: usize, st: usize) -> String {
    format!("inhib-{}", st + slot)
}

/// Motif features for interval start `st`: for each pattern and each of the
/// two interval networks, its count (`MC`) and, for 5-node patterns, the
/// number of 4-to-5 transitions into it (`MT`).
pub fn extract_motif_features(
    analyses: &[CascadeAnalysis],
    patterns: &[PatternId],
    st: usize,
    options: FeatureOptions,
) -> Result<FeatureMatrix<f64>> {
    let sources: Vec<PatternId> = if options.pair_level_transitions {
        pattern_catalog(4)?.iter().copied().filter(|&p4| patterns.iter().any(|&p5| p5.k() == 5 && contains(p4, p5))).collect()
    } else {
        Vec::new()
    };
    let mt_sources = |p: PatternId| -> Vec<PatternId> { sources.iter().copied().filter(|&p4| contains(p4, p)).collect() };
    let mut names = Vec::new();
    for p in patterns {
        for slot in 0..2 {
            names.push(format!("MC_{p}@{}", slot_name(slot, st)));
            if p.k() == 5 {
                if options.pair_level_transitions {
                    for p4 in mt_sources(*p) {
                        names.push(format!("MT_{p4}>{p}@{}", slot_name(slot, st)));
                    }
                } else {
                    names.push(format!("MT_{p}@{}", slot_name(slot, st)));
                }
            }
        }
    }
    let mut m = FeatureMatrix::new(names)?;
    let observe = |v: u64| (!(options.absent_as_missing && v == 0)).then_some(v as f64);
    for a in analyses {
        let nets = a.interval(st).map(|i| i.and_then(|i| a.networks.get(&i)));
        let mut row = Vec::new();
        for p in patterns {
            for net in &nets {
                row.push(net.and_then(|n| n.census.get(p).copied()).and_then(observe));
                if p.k() != 5 {
                    continue;
                }
                if options.pair_level_transitions {
                    let pairs = net.and_then(|n| n.transition_pairs.as_ref());
                    for p4 in mt_sources(*p) {
                        row.push(
                            pairs
                                .map(|t| t.iter().find(|e| e.0 == p4 && e.1 == *p).map_or(0, |e| e.2))
                                .and_then(observe),
                        );
                    }
                } else {
                    row.push(
                        net.and_then(|n| n.transitions_in.as_ref())
                            .map(|t| t.get(p).copied().unwrap_or(0))
                            .and_then(observe),
                    );
                }
            }
        }
        m.push_row(a.cascade_id.clone(), &row)?;
    }
    Ok(m)
}

/// Centrality features of the two interval networks.
pub fn extract_centrality_features(analyses: &[CascadeAnalysis], st: usize) -> Result<FeatureMatrix<f64>> {
    let mut names = Vec::new();
    for slot in 0..2 {
        for c in CENTRALITY_NAMES {
            names.push(format!("{c}@{}", slot_name(slot, st)));
        }
    }
    let mut m = FeatureMatrix::new(names)?;
    for a in analyses {
        let mut row = Vec::new();
        for i in a.interval(st) {
            let net = i.and_then(|i| a.networks.get(&i));
            match net {
                Some(n) => row.extend(n.centrality.values().map(Some)),
                None => row.extend([None; 5]),
            }
        }
        m.push_row(a.cascade_id.clone(), &row)?;
    }
    Ok(m)
}

/// Regression targets in row order.
pub fn targets(analyses: &[CascadeAnalysis]) -> Vec<f64> {
    analyses.iter().map(|a| a.target_edges as f64).collect()
}
