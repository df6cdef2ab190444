//! Motif censuses: connected induced subgraphs grouped by pattern.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::canon::{canon_table, classify_subset, pattern_catalog, PatternId};
use super::esu::for_each_connected;
use crate::error::Result;
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CensusMode {
    /// Keep every instance's vertex set.
    #[default]
    Instances,
    /// Keep counts only.
    CountOnly,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Entry {
    count: u64,
    /// Sorted vertex sets, `k` ids each, concatenated.
    flat: Vec<u32>,
}

/// Census of connected induced `k`-vertex subgraphs of one graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotifCensus {
    k: usize,
    mode: CensusMode,
    entries: BTreeMap<PatternId, Entry>,
}

impl MotifCensus {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> CensusMode {
        self.mode
    }

    pub fn count(&self, p: PatternId) -> u64 {
        self.entries.get(&p).map_or(0, |e| e.count)
    }

    pub fn total(&self) -> u64 {
        self.entries.values().map(|e| e.count).sum()
    }

    /// Patterns with at least one instance, ascending.
    pub fn patterns(&self) -> impl Iterator<Item = PatternId> + '_ {
        self.entries.keys().copied()
    }

    /// Vertex sets of `p`, each sorted. Empty in count-only mode.
    pub fn instances(&self, p: PatternId) -> impl Iterator<Item = &[u32]> {
        let k = self.k;
        self.entries
            .get(&p)
            .map_or(&[][..], |e| e.flat.as_slice())
            .chunks_exact(k)
    }

    /// Counts for every catalog pattern, including zeros, in catalog order.
    pub fn dense_counts(&self) -> Vec<(PatternId, u64)> {
        pattern_catalog(self.k)
            .expect("census k is validated")
            .iter()
            .map(|&p| (p, self.count(p)))
            .collect()
    }
}

/// Enumerates every connected `k`-vertex set of `g` and classifies it.
pub fn motif_census(g: &Graph, k: usize, mode: CensusMode) -> Result<MotifCensus> {
    let table = canon_table(k)?;
    let mut entries: BTreeMap<PatternId, Entry> = BTreeMap::new();
    let mut sorted = vec![0u32; k];
    for_each_connected(g, k, |set| {
        let p = classify_subset(table, g, k, set);
        let e = entries.entry(p).or_default();
        e.count += 1;
        if mode == CensusMode::Instances {
            sorted.copy_from_slice(set);
            sorted.sort_unstable();
            e.flat.extend_from_slice(&sorted);
        }
    });
    Ok(MotifCensus { k, mode, entries })
}
