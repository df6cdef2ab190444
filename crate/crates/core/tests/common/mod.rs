//! Brute-force oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use cascade_motifs::cascade::{Cascade, DiffusionNetwork, UserId, UserRegistry};
use cascade_motifs::graph::Graph;
use cascade_motifs::motif::{pattern_catalog, PatternId};
use cascade_motifs::prediction::FeatureMatrix;
use cascade_motifs::synth::{synthesize_cascade, GrowthShape, SynthParams};
use cascade_motifs::transitions::TransitionThresholds;
use cascade_motifs::windows::{EdgeTag, TemporalNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, density: f64) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if rng.random_bool(density) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[u32])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for v in start..n {
            if n - v < k - cur.len() {
                break;
            }
            cur.push(v as u32);
            go(v + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), &mut f);
}

fn adjacency(g: &Graph, nodes: &[u32]) -> Vec<Vec<bool>> {
    nodes.iter().map(|&a| nodes.iter().map(|&b| a != b && g.has_edge(a, b)).collect()).collect()
}

fn connected(adj: &[Vec<bool>]) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if adj[i][j] && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.iter().all(|&s| s)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Isomorphism invariant: the largest row-major upper-triangle string over
/// all vertex orders. Deliberately a different encoding from the library's.
fn oracle_key(adj: &[Vec<bool>]) -> Vec<bool> {
    let k = adj.len();
    permutations(k)
        .into_iter()
        .map(|p| {
            let mut bits = Vec::with_capacity(k * (k - 1) / 2);
            for i in 0..k {
                for j in (i + 1)..k {
                    bits.push(adj[p[i]][p[j]]);
                }
            }
            bits
        })
        .max()
        .unwrap()
}

/// Classifies a connected `k`-node graph by comparison with the catalog.
pub fn oracle_pattern(adj: &[Vec<bool>]) -> PatternId {
    thread_local! {
        static KEYS: std::cell::RefCell<BTreeMap<Vec<bool>, PatternId>> = Default::default();
    }
    KEYS.with(|keys| {
        let mut keys = keys.borrow_mut();
        if keys.is_empty() {
            for k in 3..=5 {
                for &p in pattern_catalog(k).unwrap() {
                    let g = p.graph();
                    let all: Vec<u32> = (0..k as u32).collect();
                    keys.insert(oracle_key(&adjacency(&g, &all)), p);
                }
            }
        }
        *keys.get(&oracle_key(adj)).expect("connected pattern of size 3..=5")
    })
}

/// Every connected induced `k`-subset with its pattern.
pub fn brute_instances(g: &Graph, k: usize) -> Vec<(Vec<u32>, PatternId)> {
    let mut out = Vec::new();
    for_each_subset(g.node_count(), k, |s| {
        let adj = adjacency(g, s);
        if connected(&adj) {
            out.push((s.to_vec(), oracle_pattern(&adj)));
        }
    });
    out
}

pub fn brute_census(g: &Graph, k: usize) -> BTreeMap<PatternId, u64> {
    let mut counts = BTreeMap::new();
    for (_, p) in brute_instances(g, k) {
        *counts.entry(p).or_insert(0) += 1;
    }
    counts
}

/// Whether some injective map of `small`'s vertices into `big`'s carries
/// every edge of `small` onto an edge (and, if `induced`, every non-edge onto
/// a non-edge).
pub fn oracle_contains(small: PatternId, big: PatternId, induced: bool) -> bool {
    let (a, b) = (small.graph(), big.graph());
    let (ks, kb) = (small.k(), big.k());
    let mut found = false;
    for_each_subset(kb, ks, |subset| {
        for p in permutations(ks) {
            let ok = (0..ks).all(|i| {
                ((i + 1)..ks).all(|j| {
                    let in_small = a.has_edge(i as u32, j as u32);
                    let in_big = b.has_edge(subset[p[i]], subset[p[j]]);
                    if induced {
                        in_small == in_big
                    } else {
                        !in_small || in_big
                    }
                })
            });
            found |= ok;
        }
    });
    found
}

/// Direct double loop over all 4-instances of `prev` and 5-instances of
/// `curr` that share four users.
pub fn naive_transitions(
    prev: &TemporalNetwork,
    curr: &TemporalNetwork,
    thresholds: &TransitionThresholds,
    induced: bool,
) -> BTreeMap<(PatternId, PatternId), u64> {
    let four = brute_instances(prev.graph(), 4);
    let five = brute_instances(curr.graph(), 5);
    let count = |list: &[(Vec<u32>, PatternId)], p: PatternId| list.iter().filter(|(_, q)| *q == p).count() as u64;
    let mut out = BTreeMap::new();
    for &p4 in pattern_catalog(4).unwrap() {
        for &p5 in pattern_catalog(5).unwrap() {
            let admitted = count(&four, p4) >= thresholds.min_count(p4) && count(&five, p5) >= thresholds.min_count(p5);
            if admitted && oracle_contains(p4, p5, induced) {
                out.insert((p4, p5), 0);
            }
        }
    }
    // user sets as bitmasks keep the double loop cheap
    let mask = |net: &TemporalNetwork, m: &[u32]| -> u128 {
        m.iter().map(|&v| net.user(v).0).inspect(|&u| assert!(u < 128)).fold(0, |acc, u| acc | 1u128 << u)
    };
    let five: Vec<(u128, PatternId)> = five.iter().map(|(m, p)| (mask(curr, m), *p)).collect();
    for (m4, p4) in &four {
        let u4 = mask(prev, m4);
        for (u5, p5) in &five {
            if (u4 & u5).count_ones() == 4 {
                if let Some(c) = out.get_mut(&(*p4, *p5)) {
                    *c += 1;
                }
            }
        }
    }
    out
}

/// Two random networks on user sets `a ∪ b` and `b ∪ c` with `|b| = shared`.
pub fn random_network_pair<R: Rng>(rng: &mut R, outer: usize, shared: usize, density: f64) -> (TemporalNetwork, TemporalNetwork) {
    let users = |range: std::ops::Range<usize>| range.map(|u| UserId(u as u32)).collect::<Vec<_>>();
    let prev_nodes = users(0..outer + shared);
    let curr_nodes = users(outer..2 * outer + shared);
    let mut net = |index: usize, nodes: Vec<UserId>| {
        let mut edges = Vec::new();
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                if rng.random_bool(density) {
                    let tag = if rng.random_bool(0.5) { EdgeTag::Cascade } else { EdgeTag::Historical };
                    edges.push((nodes[i], nodes[j], tag));
                }
            }
        }
        TemporalNetwork::from_edges(index, "pair", nodes, edges).unwrap()
    };
    let prev = net(1, prev_nodes);
    let curr = net(2, curr_nodes);
    (prev, curr)
}

/// Hawkes intensity by direct summation over all earlier events.
pub fn hawkes_direct(times: &[f64], weights: &[f64], mu: f64, alpha: f64, beta: f64) -> Vec<f64> {
    times
        .iter()
        .map(|&t| {
            let mut s = 0.0;
            for (&ti, &w) in times.iter().zip(weights) {
                if ti < t {
                    s += w * beta * (-beta * (t - ti)).exp();
                }
            }
            mu + alpha * s
        })
        .collect()
}

/// A synthetic Type I cascade with its historical overlay.
pub fn synth_cascade(id: &str, n: usize, prob: f64, seed: u64) -> (Cascade, DiffusionNetwork, f64) {
    let mut users = UserRegistry::new();
    let params = SynthParams {
        n_participants: n,
        logistic_midpoint: 300.0,
        logistic_rate: 0.02,
        historical_edge_prob: prob,
        shape: GrowthShape::TypeI,
        coactivity_span: 10,
    };
    let s = synthesize_cascade(id, &params, &mut users, seed).unwrap();
    (s.cascade, s.overlay, s.true_midpoint)
}

/// Whether a simple graph has no cycle (edges = nodes - components).
pub fn is_forest(g: &Graph) -> bool {
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

pub fn matrix(rows: &[Vec<f64>]) -> FeatureMatrix<f64> {
    let p = rows.first().map_or(0, Vec::len);
    let mut m = FeatureMatrix::new((0..p).map(|j| format!("x{j}")).collect()).unwrap();
    for (i, r) in rows.iter().enumerate() {
        m.push_row(format!("r{i}"), &r.iter().map(|&v| Some(v)).collect::<Vec<_>>()).unwrap();
    }
    m
}

/// `n x p` design with `y = X w + noise`.
pub fn problem(seed: u64, n: usize, p: usize, noise: f64) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let w: Vec<f64> = (0..p).map(|j| if j % 3 == 0 { 0.0 } else { r.random_range(-3.0..3.0) }).collect();
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|j| 5.0 * j as f64 + r.random_range(-2.0..2.0) * (1.0 + j as f64)).collect())
        .collect();
    let y = x
        .iter()
        .map(|row| {
            let e: f64 = StandardNormal.sample(&mut r);
            7.0 + row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + noise * e
        })
        .collect();
    (x, y, w)
}

/// Ordinary least squares with an intercept via nalgebra.
pub fn ols(x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let (n, p) = (x.len(), x[0].len());
    let a = DMatrix::from_fn(n, p + 1, |i, j| if j == p { 1.0 } else { x[i][j] });
    let b = DVector::from_row_slice(y);
    let sol = (a.transpose() * &a).cholesky().unwrap().solve(&(a.transpose() * b));
    (sol.as_slice()[..p].to_vec(), sol[p])
}

/// Proximal gradient (ISTA) on the standardised lasso objective, mapped
/// back to the original scale.
pub fn ista(x: &[Vec<f64>], y: &[f64], eta: f64) -> (Vec<f64>, f64) {
    let (n, p) = (x.len(), x[0].len());
    let nf = n as f64;
    let mean: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / nf).collect();
    let sd: Vec<f64> = (0..p)
        .map(|j| (x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / nf).sqrt())
        .collect();
    let z = DMatrix::from_fn(n, p, |i, j| (x[i][j] - mean[j]) / sd[j]);
    let ym = y.iter().sum::<f64>() / nf;
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - ym));
    let gram = z.transpose() * &z / nf;
    let zy = z.transpose() * &yc / nf;
    let lip = gram.symmetric_eigenvalues().max();
    let step = 1.0 / lip;
    let mut b = DVector::zeros(p);
    for _ in 0..200_000 {
        let grad = &gram * &b - &zy;
        let next = (&b - grad * step).map(|v: f64| v.signum() * (v.abs() - step * eta).max(0.0));
        let delta = (&next - &b).amax();
        b = next;
        if delta < 1e-13 {
            break;
        }
    }
    let w: Vec<f64> = (0..p).map(|j| b[j] / sd[j]).collect();
    let icpt = ym - w.iter().zip(&mean).map(|(a, m)| a * m).sum::<f64>();
    (w, icpt)
}
