mod common;

use std::collections::HashSet;

use cascade_motifs::cascade::{Cascade, UserId};
use cascade_motifs::windows::{build_window_network, partition_subsequences, EdgeTag, TemporalSeries};
use proptest::prelude::*;
use rand::seq::SliceRandom;

use common::{is_forest, rng, synth_cascade};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn windows_partition_participants(n in 80usize..400, w in 2usize..60, seed in any::<u64>()) {
        prop_assume!(n >= 2 * w);
        let (c, _, _) = synth_cascade("p", n, 0.0, seed);
        let ws = partition_subsequences(&c, w).unwrap();
        prop_assert_eq!(ws.len(), c.size() / w);
        let mut seen = HashSet::new();
        for (i, s) in ws.iter().enumerate() {
            prop_assert_eq!(s.index, i);
            prop_assert_eq!(s.nodes.len(), w);
            for u in &s.nodes {
                prop_assert!(seen.insert(*u), "user in two windows");
            }
        }
        let order: Vec<UserId> = c.participants()[..ws.len() * w].to_vec();
        let joined: Vec<UserId> = ws.iter().flat_map(|s| s.nodes.clone()).collect();
        prop_assert_eq!(joined, order);
    }

    #[test]
    fn networks_are_simple_and_bounded(n in 80usize..300, prob in 0.0f64..0.5, seed in any::<u64>()) {
        let w = 20;
        let (c, d, _) = synth_cascade("b", n, prob, seed);
        let series = TemporalSeries::build(&c, w, &d).unwrap();
        for net in &series.networks {
            prop_assert!(net.nodes().len() <= 2 * w);
            let g = net.graph();
            let edges = g.edges();
            prop_assert!(edges.iter().all(|(u, v)| u < v));
            let distinct: HashSet<_> = edges.iter().collect();
            prop_assert_eq!(distinct.len(), g.edge_count());
        }
    }

    #[test]
    fn window_cascade_edges_are_disjoint(n in 80usize..300, prob in 0.0f64..0.5, seed in any::<u64>()) {
        let (c, d, _) = synth_cascade("d", n, prob, seed);
        let ws = partition_subsequences(&c, 20).unwrap();
        let mut seen = HashSet::new();
        for s in &ws {
            for (u, v, tag) in build_window_network(&c, s, &d) {
                if tag == EdgeTag::Cascade {
                    prop_assert!(seen.insert((u.min(v), u.max(v))));
                }
            }
        }
    }

    #[test]
    fn loops_need_historical_edges(n in 80usize..300, prob in 0.0f64..0.6, seed in any::<u64>()) {
        let (c, d, _) = synth_cascade("l", n, prob, seed);
        let series = TemporalSeries::build(&c, 20, &d).unwrap();
        for net in &series.networks {
            prop_assert!(is_forest(&net.subgraph_with_tag(EdgeTag::Cascade)));
            if prob == 0.0 {
                prop_assert!(is_forest(net.graph()));
            }
        }
    }

    #[test]
    fn shuffled_log_builds_identical_networks(n in 80usize..200, seed in any::<u64>()) {
        let (c, d, _) = synth_cascade("s", n, 0.2, seed);
        // distinct times keep first-appearance order well defined
        let times: HashSet<u64> = c.events().iter().map(|e| e.time.to_bits()).collect();
        prop_assume!(times.len() == c.events().len());
        let mut events = c.events().to_vec();
        events.shuffle(&mut rng(seed ^ 1));
        let shuffled = Cascade::new("s", events).unwrap();
        let a = TemporalSeries::build(&c, 20, &d).unwrap();
        let b = TemporalSeries::build(&shuffled, 20, &d).unwrap();
        prop_assert_eq!(a.windows, b.windows);
        prop_assert_eq!(a.networks, b.networks);
    }
}

#[test]
fn reshare_edges_survive_unless_windows_apart() {
    for seed in 0..10 {
        let (c, d, _) = synth_cascade("r", 300, 0.1, seed);
        let series = TemporalSeries::build(&c, 40, &d).unwrap();
        let window_of = |u: UserId| series.windows.iter().position(|s| s.nodes.contains(&u));
        let mut far = HashSet::new();
        for e in c.events() {
            let (Some(a), Some(b)) = (window_of(e.source), window_of(e.target)) else {
                continue;
            };
            let present = series.networks.iter().any(|net| {
                let pos = |u: UserId| net.nodes().iter().position(|&x| x == u).map(|p| p as u32);
                matches!((pos(e.source), pos(e.target)), (Some(x), Some(y)) if net.graph().has_edge(x, y))
            });
            if a.abs_diff(b) >= 2 {
                assert!(!present);
                far.insert((e.source.min(e.target), e.source.max(e.target)));
            } else {
                assert!(present, "adjacent-window reshare lost");
            }
        }
        assert_eq!(far.len(), series.dropped_reshare_edges);
    }
}
