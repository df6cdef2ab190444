//! Compact undirected simple graph over dense vertex ids.

use std::collections::HashMap;
use std::hash::Hash;

/// Undirected simple graph on vertices `0..n`.
///
/// Adjacency is kept twice: sorted neighbour lists for iteration and a bit
/// matrix for constant-time edge tests, which the subgraph enumerator and the
/// edge-switching null model both hit in their inner loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    adj: Vec<Vec<u32>>,
    edges: usize,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Graph {
            n,
            words,
            bits: vec![0; n * words],
            adj: vec![Vec::new(); n],
            edges: 0,
        }
    }

    /// Builds a graph, silently skipping self-loops and repeated pairs.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Maps arbitrary hashable labels to dense ids (in order of first
    /// appearance) and builds the graph. Returns the graph and the label of
    /// every dense id.
    pub fn from_labeled_edges<L, I>(edges: I) -> (Self, Vec<L>)
    where
        L: Clone + Eq + Hash,
        I: IntoIterator<Item = (L, L)>,
    {
        let mut ids: HashMap<L, u32> = HashMap::new();
        let mut labels = Vec::new();
        let mut pairs = Vec::new();
        for (a, b) in edges {
            let mut id_of = |x: L| {
                *ids.entry(x.clone()).or_insert_with(|| {
                    labels.push(x);
                    (labels.len() - 1) as u32
                })
            };
            let ia = id_of(a);
            let ib = id_of(b);
            pairs.push((ia, ib));
        }
        (Graph::from_edges(labels.len(), pairs), labels)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    #[inline]
    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let (u, v) = (u as usize, v as usize);
        (self.bits[u * self.words + v / 64] >> (v % 64)) & 1 == 1
    }

    #[inline]
    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.adj[u as usize]
    }

    #[inline]
    pub fn degree(&self, u: u32) -> usize {
        self.adj[u as usize].len()
    }

    /// Adds `{u, v}`. Returns `false` for self-loops and existing edges.
    pub fn add_edge(&mut self, u: u32, v: u32) -> bool {
        assert!((u as usize) < self.n && (v as usize) < self.n, "vertex out of range");
        if u == v || self.has_edge(u, v) {
            return false;
        }
        self.set_bit(u, v, true);
        self.set_bit(v, u, true);
        insert_sorted(&mut self.adj[u as usize], v);
        insert_sorted(&mut self.adj[v as usize], u);
        self.edges += 1;
        true
    }

    pub fn remove_edge(&mut self, u: u32, v: u32) -> bool {
        if u == v || !self.has_edge(u, v) {
            return false;
        }
        self.set_bit(u, v, false);
        self.set_bit(v, u, false);
        remove_sorted(&mut self.adj[u as usize], v);
        remove_sorted(&mut self.adj[v as usize], u);
        self.edges -= 1;
        true
    }

    /// Edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edges);
        for (u, nbrs) in self.adj.iter().enumerate() {
            let u = u as u32;
            out.extend(nbrs.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    /// Sorted degree multiset.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        d.sort_unstable();
        d
    }

    /// Graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[u32]) -> Graph {
        assert_eq!(perm.len(), self.n);
        Graph::from_edges(
            self.n,
            self.edges().into_iter().map(|(u, v)| (perm[u as usize], perm[v as usize])),
        )
    }

    /// Induced subgraph on `nodes`; vertex `i` of the result is `nodes[i]`.
    pub fn induced(&self, nodes: &[u32]) -> Graph {
        let mut g = Graph::new(nodes.len());
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                if self.has_edge(nodes[i], nodes[j]) {
                    g.add_edge(i as u32, j as u32);
                }
            }
        }
        g
    }

    /// Whether the vertex subset induces a connected subgraph.
    pub fn is_connected_subset(&self, nodes: &[u32]) -> bool {
        if nodes.is_empty() {
            return false;
        }
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(i) = stack.pop() {
            for j in 0..nodes.len() {
                if !seen[j] && self.has_edge(nodes[i], nodes[j]) {
                    seen[j] = true;
                    reached += 1;
                    stack.push(j);
                }
            }
        }
        reached == nodes.len()
    }

    /// Number of triangles.
    pub fn triangle_count(&self) -> usize {
        let mut t = 0;
        for (u, v) in self.edges() {
            for &w in self.neighbors(v) {
                if w > v && self.has_edge(u, w) {
                    t += 1;
                }
            }
        }
        t
    }

    fn set_bit(&mut self, u: u32, v: u32, on: bool) {
        let (u, v) = (u as usize, v as usize);
        let w = &mut self.bits[u * self.words + v / 64];
        if on {
            *w |= 1 << (v % 64);
        } else {
            *w &= !(1 << (v % 64));
        }
    }
}

fn insert_sorted(list: &mut Vec<u32>, x: u32) {
    if let Err(pos) = list.binary_search(&x) {
        list.insert(pos, x);
    }
}

fn remove_sorted(list: &mut Vec<u32>, x: u32) {
    if let Ok(pos) = list.binary_search(&x) {
        list.remove(pos);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_and_duplicates() {
        let g = Graph::from_edges(3, [(0, 1), (1, 0), (2, 2), (1, 2)]);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(1, 0));
        assert!(!g.has_edge(2, 2));
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn removal_keeps_both_views_in_sync() {
        let mut g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(g.remove_edge(2, 1));
        assert!(!g.remove_edge(2, 1));
        assert!(!g.has_edge(1, 2));
        assert_eq!(g.neighbors(2), &[3]);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degree_sequence(), vec![1, 1, 2, 2]);
    }

    #[test]
    fn wide_graphs_use_multiple_words() {
        let mut g = Graph::new(130);
        g.add_edge(3, 129);
        g.add_edge(64, 65);
        assert!(g.has_edge(129, 3));
        assert!(g.has_edge(65, 64));
        assert!(!g.has_edge(3, 65));
    }

    #[test]
    fn triangles_and_connectivity() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (0, 2), (2, 3)]);
        assert_eq!(g.triangle_count(), 1);
        assert!(g.is_connected_subset(&[0, 1, 2, 3]));
        assert!(!g.is_connected_subset(&[0, 3]));
        assert!(!g.is_connected_subset(&[0, 4]));
    }

    #[test]
    fn labeled_construction() {
        let (g, labels) = Graph::from_labeled_edges([("a", "b"), ("b", "c"), ("c", "a")]);
        assert_eq!(labels, vec!["a", "b", "c"]);
        assert_eq!(g.edge_count(), 3);
    }
}
