//! Node centralities and the network-level summaries used as baseline
//! features.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::scalar::Scalar;

pub const TOP_NODES: usize = 10;
pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOLERANCE: f64 = 1e-9;
const PAGERANK_MAX_ITER: usize = 10_000;

pub fn degree_centrality<F: Scalar>(g: &Graph) -> Vec<F> {
    (0..g.node_count() as u32).map(|v| F::from_count(g.degree(v))).collect()
}

/// Local clustering coefficient; zero for nodes of degree below two.
pub fn clustering<F: Scalar>(g: &Graph) -> Vec<F> {
    (0..g.node_count() as u32)
        .map(|v| {
            let nb = g.neighbors(v);
            let d = nb.len();
            if d < 2 {
                return F::zero();
            }
            let mut links = 0usize;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if g.has_edge(a, b) {
                        links += 1;
                    }
                }
            }
            F::from_count(2 * links) / F::from_count(d * (d - 1))
        })
        .collect()
}

/// PageRank with every edge followed both ways. Mass of isolated nodes is
/// spread uniformly. Iterates until the L1 change drops below the tolerance.
pub fn pagerank<F: Scalar>(g: &Graph, damping: F, tolerance: F) -> Vec<F> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let nf = F::from_count(n);
    let mut rank = vec![F::one() / nf; n];
    for _ in 0..PAGERANK_MAX_ITER {
        let dangling: F = (0..n).filter(|&v| g.degree(v as u32) == 0).map(|v| rank[v]).sum();
        let base = (F::one() - damping) / nf + damping * dangling / nf;
        let mut next = vec![base; n];
        for v in 0..n as u32 {
            let d = g.degree(v);
            if d > 0 {
                let share = damping * rank[v as usize] / F::from_count(d);
                for &u in g.neighbors(v) {
                    next[u as usize] += share;
                }
            }
        }
        let change: F = next.iter().zip(&rank).map(|(a, b)| (*a - *b).abs()).sum();
        rank = next;
        if change < tolerance {
            break;
        }
    }
    rank
}

/// Brandes betweenness for an undirected graph, each pair counted once and
/// normalised by `(n-1)(n-2)/2`.
pub fn betweenness<F: Scalar>(g: &Graph) -> Vec<F> {
    let n = g.node_count();
    let mut cb = vec![F::zero(); n];
    let mut stack = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![F::zero(); n];
        let mut dist = vec![usize::MAX; n];
        sigma[s] = F::one();
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v as u32) {
                let w = w as usize;
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] = sigma[w] + sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![F::zero(); n];
        while let Some(w) = stack.pop() {
            let dw = delta[w];
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (F::one() + dw);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    let scale = if n > 2 {
        F::one() / F::from_count((n - 1) * (n - 2))
    } else {
        F::zero()
    };
    // every pair was seen from both ends: halve, then normalise by C(n-1, 2)
    cb.iter().map(|&c| c * scale).collect()
}

/// Shannon entropy (natural log) of the degree distribution.
pub fn degree_entropy<F: Scalar>(g: &Graph) -> F {
    let n = g.node_count();
    if n == 0 {
        return F::zero();
    }
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for v in 0..n as u32 {
        *hist.entry(g.degree(v)).or_default() += 1;
    }
    let nf = F::from_count(n);
    -hist
        .values()
        .map(|&c| {
            let p = F::from_count(c) / nf;
            p * p.ln()
        })
        .sum::<F>()
}

/// Mean of the `k` largest values (all of them if fewer).
pub fn top_mean<F: Scalar>(values: &[F], k: usize) -> F {
    if values.is_empty() {
        return F::zero();
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v.truncate(k);
    crate::scalar::mean(&v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centralities<F> {
    pub degree: F,
    pub degree_entropy: F,
    pub clustering: F,
    pub pagerank: F,
    pub betweenness: F,
}

pub const CENTRALITY_NAMES: [&str; 5] = ["degree", "degree_entropy", "clustering", "pagerank", "betweenness"];

impl<F: Scalar> Centralities<F> {
    pub fn values(&self) -> [F; 5] {
        [self.degree, self.degree_entropy, self.clustering, self.pagerank, self.betweenness]
    }
}

/// Top-10 means of the node centralities plus the network's degree entropy.
pub fn centrality_summary<F: Scalar>(g: &Graph) -> Centralities<F> {
    Centralities {
        degree: top_mean(&degree_centrality::<F>(g), TOP_NODES),
        degree_entropy: degree_entropy(g),
        clustering: top_mean(&clustering::<F>(g), TOP_NODES),
        pagerank: top_mean(&pagerank(g, F::lit(PAGERANK_DAMPING), F::lit(PAGERANK_TOLERANCE)), TOP_NODES),
        betweenness: top_mean(&betweenness::<F>(g), TOP_NODES),
    }
}
