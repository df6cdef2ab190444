//! Canonical labels for connected graphs on 3 to 5 vertices.
//!
//! A labeled graph on `k` vertices is encoded as its upper-triangular
//! adjacency bit string read row by row: pair `(0,1)` is the most significant
//! bit, then `(0,2)`, ..., `(k-2,k-1)`. The canonical code is the smallest
//! such string over all `k!` vertex orderings. With at most ten pairs every
//! labeled graph fits in a `u16`, so the whole code space is tabulated once
//! per `k`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const MIN_K: usize = 3;
pub const MAX_K: usize = 5;

/// Isomorphism class of a connected graph on `k` vertices. Ordered like the
/// catalog: by `k`, then edge count, then code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PatternId {
    k: u8,
    code: u16,
}

impl Ord for PatternId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.k, self.code.count_ones(), self.code).cmp(&(other.k, other.code.count_ones(), other.code))
    }
}

impl PartialOrd for PatternId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct Tables {
    pairs: Vec<(u32, u32)>,
    /// Canonical code of every raw code.
    canon: Vec<u16>,
    /// Whether the raw code describes a connected graph.
    connected: Vec<bool>,
    catalog: Vec<PatternId>,
}

#[inline]
pub(crate) fn pair_count(k: usize) -> usize {
    k * (k - 1) / 2
}

fn pairs_of(k: usize) -> Vec<(u32, u32)> {
    let mut p = Vec::with_capacity(pair_count(k));
    for i in 0..k as u32 {
        for j in (i + 1)..k as u32 {
            p.push((i, j));
        }
    }
    p
}

fn permutations(k: usize) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, used: &mut [bool], out: &mut Vec<Vec<u32>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v as u32);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

fn code_connected(k: usize, pairs: &[(u32, u32)], code: u16) -> bool {
    let m = pairs.len();
    let mut reach = 1u32;
    loop {
        let mut next = reach;
        for (p, &(i, j)) in pairs.iter().enumerate() {
            if code >> (m - 1 - p) & 1 == 1 {
                if reach >> i & 1 == 1 {
                    next |= 1 << j;
                }
                if reach >> j & 1 == 1 {
                    next |= 1 << i;
                }
            }
        }
        if next == reach {
            return reach.count_ones() as usize == k;
        }
        reach = next;
    }
}

fn build_tables(k: usize) -> Tables {
    let pairs = pairs_of(k);
    let m = pairs.len();
    let perms = permutations(k);
    // index of pair (i, j) with i < j
    let mut pair_index = vec![vec![0usize; k]; k];
    for (p, &(i, j)) in pairs.iter().enumerate() {
        pair_index[i as usize][j as usize] = p;
        pair_index[j as usize][i as usize] = p;
    }
    // for each permutation, where each source pair lands
    let moved: Vec<Vec<usize>> = perms
        .iter()
        .map(|perm| {
            pairs
                .iter()
                .map(|&(i, j)| pair_index[perm[i as usize] as usize][perm[j as usize] as usize])
                .collect()
        })
        .collect();

    let space = 1usize << m;
    let mut canon = vec![u16::MAX; space];
    for raw in 0..space {
        if canon[raw] != u16::MAX {
            continue;
        }
        let images: Vec<u16> = moved
            .iter()
            .map(|targets| {
                let mut img = 0u16;
                for (p, &q) in targets.iter().enumerate() {
                    if raw >> (m - 1 - p) & 1 == 1 {
                        img |= 1 << (m - 1 - q);
                    }
                }
                img
            })
            .collect();
        let min = *images.iter().min().expect("at least one permutation");
        for img in images {
            canon[img as usize] = min;
        }
    }
    let connected: Vec<bool> = (0..space).map(|c| code_connected(k, &pairs, c as u16)).collect();

    let mut catalog: Vec<PatternId> = (0..space)
        .filter(|&c| connected[c] && canon[c] as usize == c)
        .map(|c| PatternId {
            k: k as u8,
            code: c as u16,
        })
        .collect();
    catalog.sort_by_key(|p| (p.edge_count(), p.code));
    Tables {
        pairs,
        canon,
        connected,
        catalog,
    }
}

fn tables(k: usize) -> Result<&'static Tables> {
    static CELLS: [OnceLock<Tables>; MAX_K + 1] = [const { OnceLock::new() }; MAX_K + 1];
    if !(MIN_K..=MAX_K).contains(&k) {
        return Err(Error::Config(format!("motif size {k} unsupported, expected {MIN_K}..={MAX_K}")));
    }
    Ok(CELLS[k].get_or_init(|| build_tables(k)))
}

/// All connected isomorphism classes on `k` vertices, sorted by edge count and
/// then canonical code.
pub fn pattern_catalog(k: usize) -> Result<&'static [PatternId]> {
    Ok(&tables(k)?.catalog)
}

/// Raw code of the subgraph induced by `nodes` (in the given order).
#[inline]
pub fn raw_code(g: &Graph, nodes: &[u32]) -> u16 {
    let k = nodes.len();
    let m = pair_count(k);
    let mut code = 0u16;
    let mut p = 0;
    for i in 0..k {
        for j in (i + 1)..k {
            if g.has_edge(nodes[i], nodes[j]) {
                code |= 1 << (m - 1 - p);
            }
            p += 1;
        }
    }
    code
}

/// Canonical pattern of a raw code. Fails for unsupported `k` or a
/// disconnected graph.
pub fn canonical_code(k: usize, raw: u16) -> Result<PatternId> {
    let t = tables(k)?;
    if raw as usize >= t.canon.len() {
        return Err(Error::Contract(format!("code {raw} out of range for k = {k}")));
    }
    if !t.connected[raw as usize] {
        return Err(Error::Contract(format!("code {raw:#b} describes a disconnected graph")));
    }
    Ok(PatternId {
        k: k as u8,
        code: t.canon[raw as usize],
    })
}

/// Canonical pattern of a small graph (all of its vertices).
pub fn canonical_form(g: &Graph) -> Result<PatternId> {
    let nodes: Vec<u32> = (0..g.node_count() as u32).collect();
    canonical_code(g.node_count(), raw_code(g, &nodes))
}

/// Pattern of a connected vertex subset of `g`. Connectivity is not checked;
/// callers pass sets produced by the enumerator.
#[inline]
pub(crate) fn classify_subset(t: &'static [u16], g: &Graph, k: usize, nodes: &[u32]) -> PatternId {
    PatternId {
        k: k as u8,
        code: t[raw_code(g, nodes) as usize],
    }
}

pub(crate) fn canon_table(k: usize) -> Result<&'static [u16]> {
    Ok(&tables(k)?.canon)
}

impl PatternId {
    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn code(&self) -> u16 {
        self.code
    }

    pub fn edge_count(&self) -> usize {
        self.code.count_ones() as usize
    }

    /// Edges divided by the number of vertex pairs.
    pub fn density(&self) -> f64 {
        self.edge_count() as f64 / pair_count(self.k()) as f64
    }

    /// Edge list of the canonical representative.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let pairs = pairs_of(self.k());
        let m = pairs.len();
        pairs
            .into_iter()
            .enumerate()
            .filter(|&(p, _)| self.code >> (m - 1 - p) & 1 == 1)
            .map(|(_, e)| e)
            .collect()
    }

    pub fn graph(&self) -> Graph {
        Graph::from_edges(self.k(), self.edges())
    }

    /// A connected graph is a tree exactly when it has `k - 1` edges.
    pub fn is_acyclic(&self) -> bool {
        self.edge_count() == self.k() - 1
    }

    pub fn has_triangle(&self) -> bool {
        self.graph().triangle_count() > 0
    }

    /// 1-based position in [`pattern_catalog`].
    pub fn ordinal(&self) -> usize {
        let catalog = &tables(self.k()).expect("valid k").catalog;
        catalog.iter().position(|p| p == self).expect("catalog member") + 1
    }

    /// Stable label such as `k5_M07`.
    pub fn label(&self) -> String {
        format!("k{}_M{:02}", self.k, self.ordinal())
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PatternId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad pattern label {s:?}, expected e.g. k5_M07"));
        let rest = s.strip_prefix('k').ok_or_else(bad)?;
        let (k, m) = rest.split_once("_M").ok_or_else(bad)?;
        let k: usize = k.parse().map_err(|_| bad())?;
        let m: usize = m.parse().map_err(|_| bad())?;
        let catalog = pattern_catalog(k)?;
        if m == 0 || m > catalog.len() {
            return Err(bad());
        }
        Ok(catalog[m - 1])
    }
}

impl Serialize for PatternId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for PatternId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn pairs(k: usize) -> Result<&'static [(u32, u32)]> {
    Ok(&tables(k)?.pairs)
}
