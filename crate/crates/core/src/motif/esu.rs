//! ESU enumeration of connected vertex sets and its sampled variant.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Calls `visit` once for every connected `k`-vertex set of `g`.
///
/// Vertex sets are passed in discovery order (root first), not sorted.
pub fn for_each_connected<F: FnMut(&[u32])>(g: &Graph, k: usize, mut visit: F) {
    if k == 0 || k > g.node_count() {
        return;
    }
    let mut sub = Vec::with_capacity(k);
    for v in 0..g.node_count() as u32 {
        sub.push(v);
        if k == 1 {
            visit(&sub);
        } else {
            let ext: Vec<u32> = g.neighbors(v).iter().copied().filter(|&u| u > v).collect();
            extend(g, k, v, &mut sub, ext, &mut |s| {
                visit(s);
                true
            });
        }
        sub.pop();
    }
}

/// Connected `k`-vertex sets of `g`, each sorted ascending.
pub fn enumerate_connected(g: &Graph, k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for_each_connected(g, k, |s| {
        let mut s = s.to_vec();
        s.sort_unstable();
        out.push(s);
    });
    out
}

/// Whether `u` is an exclusive neighbour candidate: outside `sub` and not
/// adjacent to any vertex of `sub` except `w`.
#[inline]
fn exclusive(g: &Graph, sub: &[u32], u: u32) -> bool {
    sub.iter().all(|&s| s != u && !g.has_edge(s, u))
}

fn extend(g: &Graph, k: usize, root: u32, sub: &mut Vec<u32>, mut ext: Vec<u32>, visit: &mut dyn FnMut(&[u32]) -> bool) {
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in g.neighbors(w) {
            if u > root && exclusive(g, sub, u) && !next.contains(&u) {
                next.push(u);
            }
        }
        sub.push(w);
        if sub.len() == k {
            visit(sub);
        } else {
            extend(g, k, root, sub, next, visit);
        }
        sub.pop();
    }
}

/// RAND-ESU: a child at depth `d` (1-based, the root is depth 1) is explored
/// with probability `depth_probs[d - 1]`. Every connected set is reached with
/// probability equal to the product of all `k` probabilities, which is passed
/// to `visit` as the inverse weight `1 / prod`.
pub fn sample_connected<R: Rng, F: FnMut(&[u32], f64)>(
    g: &Graph,
    k: usize,
    depth_probs: &[f64],
    rng: &mut R,
    mut visit: F,
) -> Result<()> {
    if depth_probs.len() != k {
        return Err(Error::Config(format!(
            "need {k} depth probabilities, got {}",
            depth_probs.len()
        )));
    }
    if depth_probs.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::Config("depth probabilities must lie in (0, 1]".into()));
    }
    if k == 0 || k > g.node_count() {
        return Ok(());
    }
    let weight = 1.0 / depth_probs.iter().product::<f64>();
    let mut sub = Vec::with_capacity(k);
    for v in 0..g.node_count() as u32 {
        if !keep(rng, depth_probs[0]) {
            continue;
        }
        sub.push(v);
        if k == 1 {
            visit(&sub, weight);
        } else {
            let ext: Vec<u32> = g.neighbors(v).iter().copied().filter(|&u| u > v).collect();
            sample_extend(g, k, v, &mut sub, ext, depth_probs, rng, &mut |s| visit(s, weight));
        }
        sub.pop();
    }
    Ok(())
}

#[inline]
fn keep<R: Rng>(rng: &mut R, p: f64) -> bool {
    p >= 1.0 || rng.random::<f64>() < p
}

#[allow(clippy::too_many_arguments)]
fn sample_extend<R: Rng>(
    g: &Graph,
    k: usize,
    root: u32,
    sub: &mut Vec<u32>,
    mut ext: Vec<u32>,
    probs: &[f64],
    rng: &mut R,
    visit: &mut dyn FnMut(&[u32]),
) {
    let p = probs[sub.len()];
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in g.neighbors(w) {
            if u > root && exclusive(g, sub, u) && !next.contains(&u) {
                next.push(u);
            }
        }
        if !keep(rng, p) {
            continue;
        }
        sub.push(w);
        if sub.len() == k {
            visit(sub);
        } else {
            sample_extend(g, k, root, sub, next, probs, rng, visit);
        }
        sub.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn complete(n: u32) -> Graph {
        Graph::from_edges(n as usize, (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))))
    }

    fn brute(g: &Graph, k: usize) -> BTreeSet<Vec<u32>> {
        let n = g.node_count() as u32;
        let mut out = BTreeSet::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let nodes: Vec<u32> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            if g.is_connected_subset(&nodes) {
                out.insert(nodes);
            }
        }
        out
    }

    #[test]
    fn small_fixtures() {
        let p5 = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(enumerate_connected(&p5, 5).len(), 1);
        assert_eq!(enumerate_connected(&complete(5), 4).len(), 5);
        assert!(enumerate_connected(&p5, 6).is_empty());
    }

    #[test]
    fn matches_brute_force_on_random_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = Graph::new(12);
        for i in 0..12 {
            for j in (i + 1)..12 {
                if rng.random_bool(0.3) {
                    g.add_edge(i, j);
                }
            }
        }
        for k in 2..=5 {
            let sets = enumerate_connected(&g, k);
            let unique: BTreeSet<Vec<u32>> = sets.iter().cloned().collect();
            assert_eq!(unique.len(), sets.len(), "duplicate set for k = {k}");
            assert_eq!(unique, brute(&g, k));
        }
    }

    #[test]
    fn sampling_with_unit_probs_is_exact() {
        let g = complete(6);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut got = Vec::new();
        sample_connected(&g, 3, &[1.0; 3], &mut rng, |s, w| {
            assert_eq!(w, 1.0);
            let mut s = s.to_vec();
            s.sort_unstable();
            got.push(s);
        })
        .unwrap();
        let mut want = enumerate_connected(&g, 3);
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn sampling_rejects_bad_probs() {
        let g = complete(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_connected(&g, 3, &[1.0, 0.0, 1.0], &mut rng, |_, _| {}).is_err());
        assert!(sample_connected(&g, 3, &[1.0, 1.0], &mut rng, |_, _| {}).is_err());
        assert!(sample_connected(&g, 3, &[1.0, 1.5, 1.0], &mut rng, |_, _| {}).is_err());
    }

    #[test]
    fn half_probability_yield_on_k6() {
        let g = complete(6);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let runs = 10_000;
        let yields: Vec<f64> = (0..runs)
            .map(|_| {
                let mut n = 0usize;
                sample_connected(&g, 3, &[0.5; 3], &mut rng, |_, _| n += 1).unwrap();
                n as f64
            })
            .collect();
        let mean = yields.iter().sum::<f64>() / runs as f64;
        // yields within one run are correlated through shared ancestors, so
        // the spread is measured rather than assumed binomial
        let var = yields.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        let sd = (var / runs as f64).sqrt();
        assert!((mean - 2.5).abs() < 3.0 * sd, "mean {mean}");
    }
}
