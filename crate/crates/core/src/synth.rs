//! Seeded synthetic cascades with a known growth shape.
//!
//! Arrival times are drawn from the chosen shape and sorted. Each new
//! participant reshares from an earlier one picked by preferential attachment
//! on `children + 1`, so the reshare graph is a tree. Historical edges link
//! participants whose arrival ordinals are at most `coactivity_span` apart,
//! each independently with probability `historical_edge_prob`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::{logistic, Cascade, DiffusionNetwork, ReshareEvent, UserId, UserRegistry};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthShape {
    /// Logistic arrivals truncated to `t >= 0`.
    TypeI,
    /// Equal mixture of two logistics, the second centred `10 / rate` later.
    TypeII,
    /// Uniform arrivals over `[0, 2 * midpoint + 10 / rate]`.
    TypeIII,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_participants: usize,
    /// Minutes.
    pub logistic_midpoint: f64,
    /// 1/minute.
    pub logistic_rate: f64,
    pub historical_edge_prob: f64,
    pub shape: GrowthShape,
    pub coactivity_span: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_participants: 400,
            logistic_midpoint: 200.0,
            logistic_rate: 0.02,
            historical_edge_prob: 0.05,
            shape: GrowthShape::TypeI,
            coactivity_span: 10,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synthetic cascade: {m}")));
        if self.n_participants < 2 {
            return bad("n_participants must be at least 2");
        }
        if !(self.logistic_rate > 0.0 && self.logistic_rate.is_finite()) {
            return bad("logistic_rate must be positive");
        }
        if !(self.logistic_midpoint >= 0.0 && self.logistic_midpoint.is_finite()) {
            return bad("logistic_midpoint must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.historical_edge_prob) {
            return bad("historical_edge_prob must lie in [0, 1]");
        }
        if self.coactivity_span == 0 {
            return bad("coactivity_span must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SynthCascade {
    pub cascade: Cascade,
    /// Historical edges among this cascade's participants.
    pub overlay: DiffusionNetwork,
    /// Growth midpoint in the cascade's rebased clock.
    pub true_midpoint: f64,
}

/// Logistic inverse CDF restricted to `t >= 0`.
fn truncated_logistic<R: Rng>(rng: &mut R, m: f64, r: f64) -> f64 {
    let f0 = logistic(0.0, r, m);
    let u = f0 + (1.0 - f0) * rng.random::<f64>();
    let u = u.clamp(f64::MIN_POSITIVE, 1.0 - 1e-12);
    (m + (u / (1.0 - u)).ln() / r).max(0.0)
}

/// Generates one cascade. User names are `{id}_u{ordinal}`, interned into
/// `users`.
pub fn synthesize_cascade(id: &str, params: &SynthParams, users: &mut UserRegistry, seed: u64) -> Result<SynthCascade> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, r) = (params.logistic_midpoint, params.logistic_rate);
    let n = params.n_participants;

    let mut arrivals: Vec<f64> = (1..n)
        .map(|_| match params.shape {
            GrowthShape::TypeI => truncated_logistic(&mut rng, m, r),
            GrowthShape::TypeII => {
                let m2 = if rng.random_bool(0.5) { m } else { m + 10.0 / r };
                truncated_logistic(&mut rng, m2, r)
            }
            GrowthShape::TypeIII => rng.random_range(0.0..=(2.0 * m + 10.0 / r)),
        })
        .collect();
    arrivals.sort_by(f64::total_cmp);

    let ids: Vec<UserId> = (0..n).map(|j| users.intern(&format!("{id}_u{j}"))).collect();
    // one ticket per participant plus one per child
    let mut tickets: Vec<usize> = vec![0];
    let mut events = Vec::with_capacity(n - 1);
    for (j, &t) in arrivals.iter().enumerate() {
        let child = j + 1;
        let parent = tickets[rng.random_range(0..tickets.len())];
        tickets.push(parent);
        tickets.push(child);
        events.push(ReshareEvent {
            source: ids[parent],
            target: ids[child],
            time: t,
        });
    }

    let mut overlay = DiffusionNetwork::new();
    if params.historical_edge_prob > 0.0 {
        for a in 0..n {
            for b in (a + 1)..n.min(a + params.coactivity_span + 1) {
                if rng.random_bool(params.historical_edge_prob) {
                    overlay.insert(ids[a], ids[b]);
                }
            }
        }
    }

    let start = arrivals[0];
    Ok(SynthCascade {
        cascade: Cascade::new(id, events)?,
        overlay,
        true_midpoint: m - start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::growth_curve;
    use crate::graph::Graph;

    fn run(params: &SynthParams, seed: u64) -> (SynthCascade, UserRegistry) {
        let mut users = UserRegistry::new();
        (synthesize_cascade("c", params, &mut users, seed).unwrap(), users)
    }

    #[test]
    fn deterministic_per_seed() {
        let p = SynthParams::default();
        let (a, _) = run(&p, 9);
        let (b, _) = run(&p, 9);
        assert_eq!(a.cascade, b.cascade);
        assert_eq!(a.overlay, b.overlay);
        let (c, _) = run(&p, 10);
        assert_ne!(a.cascade, c.cascade);
    }

    #[test]
    fn zero_probability_gives_a_tree() {
        let p = SynthParams {
            historical_edge_prob: 0.0,
            ..SynthParams::default()
        };
        let (s, _) = run(&p, 1);
        assert_eq!(s.overlay.edge_count(), 0);
        assert_eq!(s.cascade.size(), p.n_participants);
        let (g, _) = Graph::from_labeled_edges(s.cascade.events().iter().map(|e| (e.source, e.target)));
        assert_eq!(g.edge_count(), g.node_count() - 1);
        assert!(g.is_connected_subset(&(0..g.node_count() as u32).collect::<Vec<_>>()));
    }

    #[test]
    fn full_probability_adds_triangles() {
        let base = SynthParams {
            n_participants: 50,
            historical_edge_prob: 0.0,
            ..SynthParams::default()
        };
        let triangles = |s: &SynthCascade| {
            let mut net = s.overlay.clone();
            for e in s.cascade.events() {
                net.insert(e.source, e.target);
            }
            let (g, _) = Graph::from_labeled_edges(net.sorted_edges());
            // brute force over all triples
            let n = g.node_count() as u32;
            let mut t = 0;
            for a in 0..n {
                for b in (a + 1)..n {
                    for c in (b + 1)..n {
                        if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                            t += 1;
                        }
                    }
                }
            }
            t
        };
        let (tree, _) = run(&base, 4);
        let (dense, _) = run(&SynthParams { historical_edge_prob: 1.0, ..base.clone() }, 4);
        assert_eq!(dense.overlay.edge_count(), (0..50).map(|a: usize| (49 - a).min(10)).sum::<usize>());
        assert_eq!(triangles(&tree), 0);
        assert!(triangles(&dense) > triangles(&tree));
    }

    #[test]
    fn logistic_shape_matches_target() {
        let p = SynthParams {
            n_participants: 2000,
            logistic_midpoint: 300.0,
            logistic_rate: 0.02,
            ..SynthParams::default()
        };
        let (s, _) = run(&p, 2);
        let curve = growth_curve(&s.cascade);
        // closed-form target: fraction of arrivals by t, given t >= 0 and
        // the rebase by the first arrival
        let start = p.logistic_midpoint - s.true_midpoint;
        let f0 = logistic(0.0, p.logistic_rate, p.logistic_midpoint);
        let n = (p.n_participants - 1) as f64;
        let mut worst: f64 = 0.0;
        for t in [100.0, 200.0, 300.0, 400.0, 500.0] {
            let target = (logistic(t + start, p.logistic_rate, p.logistic_midpoint) - f0) / (1.0 - f0);
            let observed = (curve.size_at(t) as f64 - 1.0) / n;
            worst = worst.max((observed - target).abs());
        }
        // Kolmogorov-Smirnov scale for 2000 draws
        assert!(worst < 1.63 / n.sqrt(), "max deviation {worst}");
    }

    #[test]
    fn invalid_params() {
        let mut users = UserRegistry::new();
        let bad = SynthParams {
            n_participants: 1,
            ..SynthParams::default()
        };
        assert!(matches!(synthesize_cascade("c", &bad, &mut users, 0), Err(Error::Config(_))));
        let bad = SynthParams {
            historical_edge_prob: 1.5,
            ..SynthParams::default()
        };
        assert!(synthesize_cascade("c", &bad, &mut users, 0).is_err());
    }
}
