//! 4-node to 5-node motif transitions between consecutive temporal networks.
//!
//! A transition pairs a 4-vertex instance in `N_{i-1}` with a 5-vertex
//! instance in `N_i` that contains all four of its vertices, provided the
//! 5-pattern contains the 4-pattern as a subgraph.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::cascade::UserId;
use crate::error::{Error, Result};
use crate::motif::{canonical_code, motif_census, pairs, pattern_catalog, CensusMode, MotifCensus, PatternId};
use crate::windows::{TemporalNetwork, TemporalSeries};

type Relation = Vec<Vec<bool>>;

/// Whether some 4 vertices of `p5` carry `p4`: as an edge subset
/// (`induced = false`) or exactly (`induced = true`).
fn contains(p4: PatternId, p5: PatternId, induced: bool) -> bool {
    let g5 = p5.graph();
    let quad_pairs = pairs(4).expect("k = 4 supported");
    for drop in 0..5u32 {
        let keep: Vec<u32> = (0..5).filter(|&v| v != drop).collect();
        // edges of the 4-vertex remainder as bit positions of a k=4 code
        let present: Vec<usize> = quad_pairs
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| g5.has_edge(keep[i as usize], keep[j as usize]))
            .map(|(p, _)| p)
            .collect();
        let code_of = |subset: &[usize]| subset.iter().fold(0u16, |c, &p| c | 1 << (5 - p));
        if induced {
            if let Ok(p) = canonical_code(4, code_of(&present)) {
                if p == p4 {
                    return true;
                }
            }
            continue;
        }
        let m = present.len();
        for mask in 0u32..(1 << m) {
            if mask.count_ones() as usize != p4.edge_count() {
                continue;
            }
            let subset: Vec<usize> = (0..m).filter(|&b| mask >> b & 1 == 1).map(|b| present[b]).collect();
            if canonical_code(4, code_of(&subset)).is_ok_and(|p| p == p4) {
                return true;
            }
        }
    }
    false
}

fn relation(induced: bool) -> &'static Relation {
    static PLAIN: OnceLock<Relation> = OnceLock::new();
    static INDUCED: OnceLock<Relation> = OnceLock::new();
    let build = || {
        let c4 = pattern_catalog(4).expect("k = 4");
        let c5 = pattern_catalog(5).expect("k = 5");
        c4.iter()
            .map(|&p4| c5.iter().map(|&p5| contains(p4, p5, induced)).collect())
            .collect()
    };
    if induced {
        INDUCED.get_or_init(build)
    } else {
        PLAIN.get_or_init(build)
    }
}

/// Subgraph guard between a 4-pattern and a 5-pattern, from a table built
/// once per process.
pub fn pattern_subgraph_relation(p4: PatternId, p5: PatternId, induced: bool) -> Result<bool> {
    if p4.k() != 4 || p5.k() != 5 {
        return Err(Error::Contract(format!(
            "subgraph relation needs a 4-pattern and a 5-pattern, got k = {} and k = {}",
            p4.k(),
            p5.k()
        )));
    }
    Ok(relation(induced)[p4.ordinal() - 1][p5.ordinal() - 1])
}

/// Minimum counts a pattern needs in its network before its transitions are
/// counted. Patterns without an entry use the default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransitionThresholds {
    pub default4: u64,
    pub default5: u64,
    #[serde(default)]
    pub per_pattern: BTreeMap<PatternId, u64>,
}

impl TransitionThresholds {
    pub fn min_count(&self, p: PatternId) -> u64 {
        self.per_pattern.get(&p).copied().unwrap_or(if p.k() == 4 { self.default4 } else { self.default5 })
    }

    fn admits(&self, p: PatternId, census: &MotifCensus) -> bool {
        census.count(p) >= self.min_count(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    /// Index `i` of `N_i`; the matrix covers `(N_{i-1}, N_i)`.
    pub index: usize,
    /// Every pattern pair that passed both thresholds and the subgraph
    /// guard, including pairs with no transitions.
    pub entries: BTreeMap<(PatternId, PatternId), u64>,
}

impl TransitionMatrix {
    pub fn get(&self, p4: PatternId, p5: PatternId) -> u64 {
        self.entries.get(&(p4, p5)).copied().unwrap_or(0)
    }

    /// Transitions into `p5` from any 4-pattern.
    pub fn column_sum(&self, p5: PatternId) -> u64 {
        self.entries.iter().filter(|((_, b), _)| *b == p5).map(|(_, &c)| c).sum()
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }
}

fn require_instances(census: &MotifCensus, k: usize) -> Result<()> {
    if census.k() != k {
        return Err(Error::Contract(format!("expected a k = {k} census, got k = {}", census.k())));
    }
    if census.mode() != CensusMode::Instances {
        return Err(Error::Contract("transition counting needs a census with instances".into()));
    }
    Ok(())
}

/// Counts instance pairs `(m4, m5)` with `m4`'s vertices inside `m5`'s.
/// `prev4` and `curr5` must be instance censuses of `prev` (k = 4) and `curr`
/// (k = 5).
pub fn count_transitions(
    prev: &TemporalNetwork,
    prev4: &MotifCensus,
    curr: &TemporalNetwork,
    curr5: &MotifCensus,
    thresholds: &TransitionThresholds,
    induced: bool,
) -> Result<TransitionMatrix> {
    require_instances(prev4, 4)?;
    require_instances(curr5, 5)?;
    let c4: Vec<PatternId> = pattern_catalog(4)?.iter().copied().filter(|&p| thresholds.admits(p, prev4)).collect();
    let c5: Vec<PatternId> = pattern_catalog(5)?.iter().copied().filter(|&p| thresholds.admits(p, curr5)).collect();

    let mut entries = BTreeMap::new();
    for &p4 in &c4 {
        for &p5 in &c5 {
            if pattern_subgraph_relation(p4, p5, induced)? {
                entries.insert((p4, p5), 0u64);
            }
        }
    }
    if entries.is_empty() {
        return Ok(TransitionMatrix {
            index: curr.index(),
            entries,
        });
    }

    let mut quads: HashMap<[UserId; 4], PatternId> = HashMap::new();
    for &p4 in &c4 {
        for inst in prev4.instances(p4) {
            let mut key = [UserId(0); 4];
            for (slot, &v) in key.iter_mut().zip(inst) {
                *slot = prev.user(v);
            }
            key.sort_unstable();
            quads.insert(key, p4);
        }
    }

    for &p5 in &c5 {
        for inst in curr5.instances(p5) {
            let mut users = [UserId(0); 5];
            for (slot, &v) in users.iter_mut().zip(inst) {
                *slot = curr.user(v);
            }
            users.sort_unstable();
            for drop in 0..5 {
                let mut key = [UserId(0); 4];
                let mut j = 0;
                for (i, &u) in users.iter().enumerate() {
                    if i != drop {
                        key[j] = u;
                        j += 1;
                    }
                }
                if let Some(&p4) = quads.get(&key) {
                    if let Some(c) = entries.get_mut(&(p4, p5)) {
                        *c += 1;
                    }
                }
            }
        }
    }
    Ok(TransitionMatrix {
        index: curr.index(),
        entries,
    })
}

/// Lazily computed instance censuses of a cascade's networks, keyed by
/// `(network index, k)`.
pub struct CensusCache<'a> {
    series: &'a TemporalSeries,
    map: BTreeMap<(usize, usize), MotifCensus>,
}

impl<'a> CensusCache<'a> {
    pub fn new(series: &'a TemporalSeries) -> Self {
        CensusCache {
            series,
            map: BTreeMap::new(),
        }
    }

    pub fn series(&self) -> &'a TemporalSeries {
        self.series
    }

    pub fn get(&mut self, i: usize, k: usize) -> Result<&MotifCensus> {
        if !self.map.contains_key(&(i, k)) {
            let net = self.network(i)?;
            let census = motif_census(net.graph(), k, CensusMode::Instances)?;
            self.map.insert((i, k), census);
        }
        Ok(&self.map[&(i, k)])
    }

    /// Transition matrix of the pair `(N_{i-1}, N_i)`.
    pub fn transition(&mut self, i: usize, thresholds: &TransitionThresholds, induced: bool) -> Result<TransitionMatrix> {
        if i < 2 {
            return Err(Error::Windowing(format!("no network precedes N_{i}")));
        }
        let (prev, curr) = (self.network(i - 1)?, self.network(i)?);
        self.get(i - 1, 4)?;
        self.get(i, 5)?;
        count_transitions(prev, &self.map[&(i - 1, 4)], curr, &self.map[&(i, 5)], thresholds, induced)
    }

    pub fn network(&self, i: usize) -> Result<&'a TemporalNetwork> {
        self.series
            .get(i)
            .ok_or_else(|| Error::Windowing(format!("network N_{i} does not exist")))
    }
}

/// One matrix per consecutive pair `(N_{i-1}, N_i)` for `steep < i <= inhib`,
/// ordered by increasing `i`.
pub fn transition_series(
    cache: &mut CensusCache<'_>,
    steep: usize,
    inhib: usize,
    thresholds: &TransitionThresholds,
    induced: bool,
) -> Result<Vec<TransitionMatrix>> {
    if steep > inhib {
        return Err(Error::Lifecycle(format!("steep network {steep} is after inhibition network {inhib}")));
    }
    ((steep + 1).max(2)..=inhib)
        .map(|i| cache.transition(i, thresholds, induced))
        .collect()
}
