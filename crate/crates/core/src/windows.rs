//! Participant-count windows and the overlapping temporal networks built on
//! them.
//!
//! Windows are numbered from 0. Network `N_i` (for `1 <= i <= Q-1`) spans
//! windows `i-1` and `i`, so the first network containing window `w` is
//! `N_max(w,1)`.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cascade::{Cascade, DiffusionNetwork, UserId, UserRegistry};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_WINDOW_SIZE: usize = 40;

/// `W` consecutive new participants of a cascade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subsequence {
    pub index: usize,
    pub nodes: Vec<UserId>,
    /// Indices into the cascade's events of the events that introduce one of
    /// this window's participants.
    pub events: Vec<usize>,
    pub start: f64,
    pub end: f64,
}

/// Splits the cascade's participants, in first-appearance order, into
/// windows of exactly `w`. A trailing partial window is dropped.
pub fn partition_subsequences(cascade: &Cascade, w: usize) -> Result<Vec<Subsequence>> {
    if w < 2 {
        return Err(Error::Config(format!("window size must be at least 2, got {w}")));
    }
    let n = cascade.size();
    if n < 2 * w {
        return Err(Error::Windowing(format!(
            "cascade {:?} has {n} participants, need at least {} for two windows of {w}",
            cascade.id(),
            2 * w
        )));
    }
    let q = n / w;

    // event that introduced each participant
    let mut intro: HashMap<UserId, usize> = HashMap::with_capacity(n);
    for (i, e) in cascade.events().iter().enumerate() {
        intro.entry(e.source).or_insert(i);
        intro.entry(e.target).or_insert(i);
    }

    let events = cascade.events();
    let mut windows: Vec<Subsequence> = cascade.participants()[..q * w]
        .chunks(w)
        .enumerate()
        .map(|(index, nodes)| {
            let mut evs: Vec<usize> = nodes.iter().map(|u| intro[u]).collect();
            evs.dedup();
            Subsequence {
                index,
                nodes: nodes.to_vec(),
                start: events[evs[0]].time,
                end: events[*evs.last().expect("non-empty window")].time,
                events: evs,
            }
        })
        .collect();
    for j in 0..q - 1 {
        windows[j].end = windows[j + 1].start;
    }
    Ok(windows)
}

/// Window holding time `t`: window `j` covers `[start_j, start_{j+1})`, the
/// last window also takes every later time. `None` before the first window.
pub fn window_of_time(windows: &[Subsequence], t: f64) -> Option<usize> {
    if windows.is_empty() || t < windows[0].start {
        return None;
    }
    Some(windows.partition_point(|s| s.start <= t) - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeTag {
    Cascade,
    Historical,
}

impl EdgeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeTag::Cascade => "cascade",
            EdgeTag::Historical => "historical",
        }
    }
}

fn cascade_pairs_within(cascade: &Cascade, members: &HashSet<UserId>) -> Vec<(UserId, UserId)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for e in cascade.events() {
        if members.contains(&e.source) && members.contains(&e.target) {
            let key = if e.source < e.target {
                (e.source, e.target)
            } else {
                (e.target, e.source)
            };
            if seen.insert(key) {
                out.push(key);
            }
        }
    }
    out
}

fn historical_pairs_within(nodes: &[UserId], members: &HashSet<UserId>, diffusion: &DiffusionNetwork) -> Vec<(UserId, UserId)> {
    let mut out = Vec::new();
    for &u in nodes {
        for &v in diffusion.neighbors(u) {
            if u < v && members.contains(&v) {
                out.push((u, v));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Edge set of a single window: reshares and historical edges with both
/// endpoints among the window's participants. A pair that is both is tagged
/// as a cascade edge.
pub fn build_window_network(cascade: &Cascade, subseq: &Subsequence, diffusion: &DiffusionNetwork) -> Vec<(UserId, UserId, EdgeTag)> {
    let members: HashSet<UserId> = subseq.nodes.iter().copied().collect();
    tagged_edges(cascade, &subseq.nodes, &members, diffusion)
}

fn tagged_edges(
    cascade: &Cascade,
    nodes: &[UserId],
    members: &HashSet<UserId>,
    diffusion: &DiffusionNetwork,
) -> Vec<(UserId, UserId, EdgeTag)> {
    let cascade_edges = cascade_pairs_within(cascade, members);
    let reshared: HashSet<(UserId, UserId)> = cascade_edges.iter().copied().collect();
    let mut out: Vec<(UserId, UserId, EdgeTag)> = cascade_edges.into_iter().map(|(u, v)| (u, v, EdgeTag::Cascade)).collect();
    out.extend(
        historical_pairs_within(nodes, members, diffusion)
            .into_iter()
            .filter(|p| !reshared.contains(p))
            .map(|(u, v)| (u, v, EdgeTag::Historical)),
    );
    out
}

/// Temporal network `N_i` over windows `i-1` and `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalNetwork {
    index: usize,
    cascade_id: String,
    nodes: Vec<UserId>,
    graph: Graph,
    tags: HashMap<(u32, u32), EdgeTag>,
}

impl TemporalNetwork {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn cascade_id(&self) -> &str {
        &self.cascade_id
    }

    /// Users in local-id order: window `i-1` then window `i`.
    pub fn nodes(&self) -> &[UserId] {
        &self.nodes
    }

    pub fn user(&self, local: u32) -> UserId {
        self.nodes[local as usize]
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn tag(&self, u: u32, v: u32) -> Option<EdgeTag> {
        self.tags.get(&(u.min(v), u.max(v))).copied()
    }

    /// Sorted local edges with their tags.
    pub fn tagged_edges(&self) -> Vec<(u32, u32, EdgeTag)> {
        self.graph.edges().into_iter().map(|(u, v)| (u, v, self.tags[&(u, v)])).collect()
    }

    /// Graph restricted to edges with `tag`.
    pub fn subgraph_with_tag(&self, tag: EdgeTag) -> Graph {
        Graph::from_edges(
            self.nodes.len(),
            self.tagged_edges().into_iter().filter(|e| e.2 == tag).map(|(u, v, _)| (u, v)),
        )
    }
}

/// Builds `N_i`. Includes every reshare and historical edge between any two
/// of the network's nodes, so reshares crossing from window `i-1` into window
/// `i` are kept.
pub fn build_temporal_network(
    cascade: &Cascade,
    windows: &[Subsequence],
    i: usize,
    diffusion: &DiffusionNetwork,
) -> Result<TemporalNetwork> {
    if i == 0 || i >= windows.len() {
        return Err(Error::Windowing(format!(
            "network index {i} out of range 1..={}",
            windows.len().saturating_sub(1)
        )));
    }
    let nodes: Vec<UserId> = windows[i - 1].nodes.iter().chain(&windows[i].nodes).copied().collect();
    let members: HashSet<UserId> = nodes.iter().copied().collect();
    let edges = tagged_edges(cascade, &nodes, &members, diffusion);
    TemporalNetwork::from_edges(i, cascade.id(), nodes, edges)
}

impl TemporalNetwork {
    /// Network over `nodes` (local id = position). Edges must join listed
    /// nodes; a repeated pair keeps its first tag and self-loops are errors.
    pub fn from_edges<I>(index: usize, cascade_id: &str, nodes: Vec<UserId>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (UserId, UserId, EdgeTag)>,
    {
        let local: HashMap<UserId, u32> = nodes.iter().enumerate().map(|(j, &u)| (u, j as u32)).collect();
        if local.len() != nodes.len() {
            return Err(Error::Contract("temporal network nodes repeat".into()));
        }
        let mut graph = Graph::new(nodes.len());
        let mut tags = HashMap::new();
        for (u, v, tag) in edges {
            let (Some(&a), Some(&b)) = (local.get(&u), local.get(&v)) else {
                return Err(Error::Contract(format!("edge ({}, {}) leaves the node set", u.0, v.0)));
            };
            if a == b {
                return Err(Error::Contract(format!("self-loop on user {}", u.0)));
            }
            if graph.add_edge(a, b) {
                tags.insert((a.min(b), a.max(b)), tag);
            }
        }
        Ok(TemporalNetwork {
            index,
            cascade_id: cascade_id.to_owned(),
            nodes,
            graph,
            tags,
        })
    }
}

/// Windows and all temporal networks of one cascade.
#[derive(Clone, Debug)]
pub struct TemporalSeries {
    pub windows: Vec<Subsequence>,
    /// `networks[j]` is `N_{j+1}`.
    pub networks: Vec<TemporalNetwork>,
    /// Distinct reshare pairs whose endpoints sit two or more windows apart
    /// and therefore appear in no network.
    pub dropped_reshare_edges: usize,
}

impl TemporalSeries {
    pub fn build(cascade: &Cascade, w: usize, diffusion: &DiffusionNetwork) -> Result<Self> {
        let windows = partition_subsequences(cascade, w)?;
        let networks = (1..windows.len())
            .map(|i| build_temporal_network(cascade, &windows, i, diffusion))
            .collect::<Result<Vec<_>>>()?;

        let window_of: HashMap<UserId, usize> = windows
            .iter()
            .flat_map(|s| s.nodes.iter().map(move |&u| (u, s.index)))
            .collect();
        let mut far = HashSet::new();
        for e in cascade.events() {
            if let (Some(&a), Some(&b)) = (window_of.get(&e.source), window_of.get(&e.target)) {
                if a.abs_diff(b) >= 2 {
                    far.insert((e.source.min(e.target), e.source.max(e.target)));
                }
            }
        }
        Ok(TemporalSeries {
            windows,
            networks,
            dropped_reshare_edges: far.len(),
        })
    }

    /// Number of windows `Q`.
    pub fn window_count(&self) -> usize {
        self.windows.len()
    }

    /// `N_i` for `1 <= i <= Q-1`.
    pub fn get(&self, i: usize) -> Option<&TemporalNetwork> {
        i.checked_sub(1).and_then(|j| self.networks.get(j))
    }

    /// First network containing window `w`.
    pub fn network_of_window(w: usize) -> usize {
        w.max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifecycleIndices {
    pub steep_window: usize,
    pub inhib_window: usize,
    pub steep_network: usize,
    pub inhib_network: usize,
}

/// Maps the steep and inhibition times to their windows and to the first
/// networks containing those windows.
pub fn locate_lifecycle_networks(windows: &[Subsequence], t_steep: f64, t_inhib: f64) -> Result<LifecycleIndices> {
    if t_steep > t_inhib {
        return Err(Error::Lifecycle(format!("steep time {t_steep} is after inhibition time {t_inhib}")));
    }
    let locate = |t: f64| {
        window_of_time(windows, t).ok_or_else(|| Error::Lifecycle(format!("time {t} lies before every window")))
    };
    let steep_window = locate(t_steep)?;
    let inhib_window = locate(t_inhib)?;
    Ok(LifecycleIndices {
        steep_window,
        inhib_window,
        steep_network: TemporalSeries::network_of_window(steep_window),
        inhib_network: TemporalSeries::network_of_window(inhib_window),
    })
}

/// Writes one network as `u,v,tag` with user names.
pub fn write_network_edges<W: Write>(out: W, net: &TemporalNetwork, users: &UserRegistry) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u", "v", "tag"])?;
    for (u, v, tag) in net.tagged_edges() {
        w.write_record([users.name(net.user(u)), users.name(net.user(v)), tag.as_str()])?;
    }
    w.flush().map_err(|e| Error::io("<network edges>", e))?;
    Ok(())
}
