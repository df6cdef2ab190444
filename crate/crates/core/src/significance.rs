//! Degree-preserving null models and motif z-scores.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::motif::{motif_census, CensusMode, MotifCensus, PatternId};
use crate::scalar::Scalar;

/// Attempts allowed per requested switch before giving up.
pub const REJECTION_BUDGET: usize = 100;

/// z-score reported when the ensemble has zero spread but the input differs.
pub const Z_SENTINEL: f64 = 1e9;

#[derive(Clone, Debug)]
pub struct Randomized {
    pub graph: Graph,
    pub switches: usize,
    pub attempts: usize,
    /// Fewer switches than requested were performed.
    pub short: bool,
}

/// Double-edge swaps: edges `a-b` and `c-d`, taken in their stored
/// orientation, become `a-d` and `b-c`. Swaps that would create a self-loop
/// or a parallel edge are rejected.
pub fn edge_switch_randomize<R: Rng>(g: &Graph, switches: usize, rng: &mut R) -> Randomized {
    let mut graph = g.clone();
    let mut edges = g.edges();
    let budget = switches.saturating_mul(REJECTION_BUDGET);
    let (mut done, mut attempts) = (0, 0);
    if edges.len() >= 2 {
        while done < switches && attempts < budget {
            attempts += 1;
            let i = rng.random_range(0..edges.len());
            let j = rng.random_range(0..edges.len());
            if i == j {
                continue;
            }
            let ((a, b), (c, d)) = (edges[i], edges[j]);
            if a == d || b == c || graph.has_edge(a, d) || graph.has_edge(b, c) {
                continue;
            }
            graph.remove_edge(a, b);
            graph.remove_edge(c, d);
            graph.add_edge(a, d);
            graph.add_edge(b, c);
            edges[i] = (a, d);
            edges[j] = (b, c);
            done += 1;
        }
    }
    let short = done < switches;
    if short {
        log::debug!("edge switching performed {done} of {switches} swaps in {attempts} attempts");
    }
    Randomized {
        graph,
        switches: done,
        attempts,
        short,
    }
}

/// Ensemble member: its census and how much switching it got.
#[derive(Clone, Debug)]
pub struct NullMember {
    pub census: MotifCensus,
    pub switches: usize,
    pub short: bool,
}

#[derive(Clone, Debug)]
pub struct NullEnsemble {
    pub k: usize,
    pub members: Vec<NullMember>,
    pub requested_switches: usize,
}

impl NullEnsemble {
    pub fn counts(&self, p: PatternId) -> Vec<u64> {
        self.members.iter().map(|m| m.census.count(p)).collect()
    }

    pub fn short_members(&self) -> usize {
        self.members.iter().filter(|m| m.short).count()
    }
}

/// `r` randomizations of `g`, each with `switches_per_edge * |E|` swaps and
/// its own stream of the master seed, censused at size `k`.
pub fn build_ensemble(g: &Graph, r: usize, switches_per_edge: usize, k: usize, seed: u64) -> Result<NullEnsemble> {
    if r < 2 {
        return Err(Error::Config(format!("ensemble size must be at least 2, got {r}")));
    }
    let requested = switches_per_edge * g.edge_count();
    let members = (0..r as u64)
        .into_par_iter()
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(m);
            let rand = edge_switch_randomize(g, requested, &mut rng);
            Ok(NullMember {
                census: motif_census(&rand.graph, k, CensusMode::CountOnly)?,
                switches: rand.switches,
                short: rand.short,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NullEnsemble {
        k,
        members,
        requested_switches: requested,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdKind {
    #[default]
    Population,
    Sample,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZScore<F> {
    pub input: F,
    pub mean: F,
    pub std: F,
    pub z: F,
    /// Fraction of ensemble members with a count at least the input's.
    pub p: F,
    pub significant: bool,
}

pub fn zscore<F: Scalar>(input: F, ensemble: &[F], kind: StdKind) -> Result<ZScore<F>> {
    if ensemble.len() < 2 {
        return Err(Error::Contract("z-score needs at least two ensemble members".into()));
    }
    let n = F::from_count(ensemble.len());
    let mean = ensemble.iter().copied().sum::<F>() / n;
    let ss = ensemble.iter().map(|&x| (x - mean) * (x - mean)).sum::<F>();
    let dof = match kind {
        StdKind::Population => n,
        StdKind::Sample => n - F::one(),
    };
    let std = (ss / dof).sqrt();
    let diff = input - mean;
    let z = if std > F::zero() {
        diff / std
    } else if diff == F::zero() {
        F::zero()
    } else {
        F::lit(Z_SENTINEL).copysign(diff)
    };
    let p = F::from_count(ensemble.iter().filter(|&&x| x >= input).count()) / n;
    Ok(ZScore {
        input,
        mean,
        std,
        z,
        p,
        significant: p < F::lit(0.01) || z > F::lit(2.0),
    })
}

/// Per-pattern z-scores for every catalog pattern of size `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport<F> {
    pub k: usize,
    pub rows: Vec<(PatternId, ZScore<F>)>,
}

pub fn zscore_report<F: Scalar>(input: &MotifCensus, ensemble: &NullEnsemble, kind: StdKind) -> Result<SignificanceReport<F>> {
    if input.k() != ensemble.k {
        return Err(Error::Contract(format!(
            "census is for k = {} but the ensemble for k = {}",
            input.k(),
            ensemble.k
        )));
    }
    let rows = input
        .dense_counts()
        .into_iter()
        .map(|(p, c)| {
            let counts: Vec<F> = ensemble.counts(p).into_iter().map(|x| F::from_u64(x).expect("count")).collect();
            Ok((p, zscore(F::from_u64(c).expect("count"), &counts, kind)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignificanceReport { k: input.k(), rows })
}
