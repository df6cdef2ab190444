//! Hawkes-intensity lifecycle detection: the steep window and the inhibition
//! time of a cascade, plus grid calibration of the inhibition thresholds.

use serde::{Deserialize, Serialize};

use crate::cascade::{growth_curve, Cascade, DiffusionNetwork};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::windows::{locate_lifecycle_networks, window_of_time, LifecycleIndices, Subsequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserWeighting {
    #[default]
    Uniform,
    /// Each event's excitation is scaled by `1 + ln(1 + d)`, `d` being the
    /// source's degree in the historical network.
    DegreeWeighted,
}

impl std::str::FromStr for UserWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(UserWeighting::Uniform),
            "degree_weighted" | "degree" => Ok(UserWeighting::DegreeWeighted),
            other => Err(Error::Config(format!("unknown weighting {other:?}"))),
        }
    }
}

/// Exponential-kernel Hawkes parameters. `mu` is in events per minute and
/// `beta` in 1/minute.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HawkesConfig<F> {
    pub mu: F,
    pub alpha: F,
    pub beta: F,
    pub weighting: UserWeighting,
}

impl<F: Scalar> Default for HawkesConfig<F> {
    fn default() -> Self {
        HawkesConfig {
            mu: F::lit(0.01),
            alpha: F::one(),
            beta: F::lit(0.2),
            weighting: UserWeighting::Uniform,
        }
    }
}

impl<F: Scalar> HawkesConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= F::zero() && self.alpha >= F::zero() && self.beta > F::zero()) || !self.mu.is_finite() || !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::Config(format!(
                "Hawkes parameters need mu >= 0, alpha >= 0, beta > 0 (got {}, {}, {})",
                self.mu, self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

/// Intensity just before each event from the events strictly earlier in
/// time. Events sharing a timestamp do not excite each other. Runs in O(n)
/// using the exponential kernel's memoryless update.
pub fn intensity_at_events<F: Scalar>(times: &[F], weights: &[F], config: &HawkesConfig<F>) -> Result<Vec<F>> {
    config.validate()?;
    if times.len() != weights.len() {
        return Err(Error::Contract("times and weights differ in length".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    // decayed weight of all events strictly before the current group
    let mut state = F::zero();
    let mut state_time = times.first().copied().unwrap_or_else(F::zero);
    let mut i = 0;
    while i < times.len() {
        let t = times[i];
        if t < state_time {
            return Err(Error::Contract("event times are not sorted".into()));
        }
        state *= (-config.beta * (t - state_time)).exp();
        state_time = t;
        let lambda = config.mu + config.alpha * config.beta * state;
        let mut j = i;
        while j < times.len() && times[j] == t {
            out.push(lambda);
            j += 1;
        }
        for w in &weights[i..j] {
            state += *w;
        }
        i = j;
    }
    Ok(out)
}

/// Per-event weights under `weighting`.
pub fn event_weights<F: Scalar>(cascade: &Cascade, weighting: UserWeighting, diffusion: &DiffusionNetwork) -> Vec<F> {
    cascade
        .events()
        .iter()
        .map(|e| match weighting {
            UserWeighting::Uniform => F::one(),
            UserWeighting::DegreeWeighted => F::one() + (F::one() + F::from_count(diffusion.degree(e.source))).ln(),
        })
        .collect()
}

/// `(time, intensity)` at every event of the cascade.
pub fn hawkes_intensity<F: Scalar>(
    cascade: &Cascade,
    config: &HawkesConfig<F>,
    diffusion: &DiffusionNetwork,
) -> Result<Vec<(f64, F)>> {
    let times: Vec<F> = cascade.events().iter().map(|e| F::lit(e.time)).collect();
    let weights = event_weights(cascade, config.weighting, diffusion);
    let lambda = intensity_at_events(&times, &weights, config)?;
    Ok(cascade.events().iter().map(|e| e.time).zip(lambda).collect())
}

/// Summed intensity per window. Events before the first window count toward
/// it, events after the last toward the last.
pub fn interval_intensity_curve<F: Scalar>(intensities: &[(f64, F)], windows: &[Subsequence]) -> Vec<F> {
    let mut curve = vec![F::zero(); windows.len()];
    if windows.is_empty() {
        return curve;
    }
    for &(t, v) in intensities {
        let w = window_of_time(windows, t).unwrap_or(0);
        curve[w] += v;
    }
    curve
}

/// Strict interior local maxima and minima. A plateau counts once, at its
/// leftmost index, and only if both of its neighbours lie strictly on the
/// same side. Plateaus touching either end are ignored.
pub fn find_extrema<F: PartialOrd + Copy>(curve: &[F]) -> Result<(Vec<usize>, Vec<usize>)> {
    if curve.len() < 3 {
        return Err(Error::Lifecycle(format!("intensity curve has {} points, need 3", curve.len())));
    }
    let (mut maxima, mut minima) = (Vec::new(), Vec::new());
    let mut a = 1;
    while a < curve.len() - 1 {
        let mut b = a;
        while b + 1 < curve.len() && curve[b + 1] == curve[a] {
            b += 1;
        }
        if b < curve.len() - 1 {
            let (l, r, v) = (curve[a - 1], curve[b + 1], curve[a]);
            if l < v && r < v {
                maxima.push(a);
            } else if l > v && r > v {
                minima.push(a);
            }
        }
        a = b + 1;
    }
    Ok((maxima, minima))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteepWindow {
    pub index: usize,
    /// No interior local maximum existed; the index is the interior argmax.
    pub fallback: bool,
}

/// Window of the largest local maximum (earliest on ties). Without any local
/// maximum, falls back to the largest interior value.
pub fn detect_steep<F: PartialOrd + Copy>(curve: &[F]) -> Result<SteepWindow> {
    let (maxima, _) = find_extrema(curve)?;
    let argmax = |candidates: &mut dyn Iterator<Item = usize>| {
        let mut best: Option<usize> = None;
        for i in candidates {
            if best.is_none_or(|b| curve[i] > curve[b]) {
                best = Some(i);
            }
        }
        best.expect("non-empty candidates")
    };
    if maxima.is_empty() {
        Ok(SteepWindow {
            index: argmax(&mut (1..curve.len() - 1)),
            fallback: true,
        })
    } else {
        Ok(SteepWindow {
            index: argmax(&mut maxima.into_iter()),
            fallback: false,
        })
    }
}

/// Time of the most intense event inside window `w` (earliest on ties).
pub fn steep_time<F: Scalar>(intensities: &[(f64, F)], windows: &[Subsequence], w: usize) -> Option<f64> {
    let mut best: Option<(f64, F)> = None;
    for &(t, v) in intensities {
        if window_of_time(windows, t).unwrap_or(0) == w && best.is_none_or(|(_, bv)| v > bv) {
            best = Some((t, v));
        }
    }
    best.map(|b| b.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InhibitionThresholds {
    /// Minimum gap after the steep time, minutes.
    pub dtg: f64,
    /// Minimum growth ratio `S_t / S_steep`.
    pub g: f64,
}

impl Default for InhibitionThresholds {
    fn default() -> Self {
        InhibitionThresholds { dtg: 60.0, g: 1.5 }
    }
}

impl InhibitionThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.dtg >= 0.0 && self.dtg.is_finite() && self.g >= 1.0 && self.g.is_finite()) {
            return Err(Error::Config(format!(
                "inhibition thresholds need dtg >= 0 and g >= 1 (got {}, {})",
                self.dtg, self.g
            )));
        }
        Ok(())
    }
}

/// First event time `t` with `t - t_steep >= dtg` and
/// `S_t / S_steep >= g`, where `S_x` counts the participants of all events at
/// or before `x`. `None` when the cascade never gets there.
pub fn detect_inhibition(cascade: &Cascade, t_steep: f64, thresholds: &InhibitionThresholds) -> Option<f64> {
    let curve = growth_curve(cascade);
    let s_steep = curve.size_at(t_steep) as f64;
    if s_steep == 0.0 {
        return None;
    }
    let start = curve.points.partition_point(|p| p.time < t_steep + thresholds.dtg);
    curve.points[start..]
        .iter()
        .map(|p| p.time)
        .find(|&t| curve.size_at(t) as f64 / s_steep >= thresholds.g)
}

/// Everything lifecycle detection produces for one cascade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lifecycle {
    pub curve: Vec<f64>,
    pub steep: SteepWindow,
    pub t_steep: f64,
    pub t_inhib: Option<f64>,
    pub indices: Option<LifecycleIndices>,
}

pub fn detect_lifecycle(
    cascade: &Cascade,
    windows: &[Subsequence],
    diffusion: &DiffusionNetwork,
    hawkes: &HawkesConfig<f64>,
    thresholds: &InhibitionThresholds,
) -> Result<Lifecycle> {
    thresholds.validate()?;
    let intensities = hawkes_intensity(cascade, hawkes, diffusion)?;
    let curve = interval_intensity_curve(&intensities, windows);
    let steep = detect_steep(&curve)?;
    let t_steep = steep_time(&intensities, windows, steep.index)
        .ok_or_else(|| Error::Lifecycle(format!("steep window {} holds no events", steep.index)))?;
    let t_inhib = detect_inhibition(cascade, t_steep, thresholds);
    let indices = t_inhib
        .map(|ti| locate_lifecycle_networks(windows, t_steep, ti))
        .transpose()?;
    Ok(Lifecycle {
        curve,
        steep,
        t_steep,
        t_inhib,
        indices,
    })
}

/// Candidate values for [`calibrate_thresholds`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    pub dtg: Vec<f64>,
    pub g: Vec<f64>,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        ThresholdGrid {
            dtg: (1..=24).map(|h| 60.0 * h as f64).collect(),
            g: (1..=20).map(|i| 1.0 + 0.05 * i as f64).collect(),
        }
    }
}

/// A cascade with its windows, detected steep time and labeled inhibition
/// time (`None` if the label says it never inhibits).
#[derive(Clone, Debug)]
pub struct CalibrationCase<'a> {
    pub cascade: &'a Cascade,
    pub windows: &'a [Subsequence],
    pub t_steep: f64,
    pub t_inhib: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub thresholds: InhibitionThresholds,
    /// Mean absolute window-index error of the chosen thresholds.
    pub window_error: f64,
    /// Mean absolute time error in minutes, used to break window-error ties.
    pub time_error: f64,
}

fn case_errors(case: &CalibrationCase<'_>, predicted: Option<f64>) -> (f64, f64) {
    let q = case.windows.len();
    let index = |t: Option<f64>| t.and_then(|t| window_of_time(case.windows, t)).unwrap_or(q);
    let time = |t: Option<f64>| t.unwrap_or(case.cascade.lifetime());
    (
        index(predicted).abs_diff(index(case.t_inhib)) as f64,
        (time(predicted) - time(case.t_inhib)).abs(),
    )
}

/// Grid search minimising the mean window-index error of
/// [`detect_inhibition`] against the labels, then the mean time error. Ties
/// go to the smaller `dtg`, then the smaller `g`. A missing detection or
/// label counts as window `Q`.
pub fn calibrate_thresholds(cases: &[CalibrationCase<'_>], grid: &ThresholdGrid) -> Result<Calibration> {
    if grid.dtg.is_empty() || grid.g.is_empty() {
        return Err(Error::Config("calibration grid is empty".into()));
    }
    if cases.is_empty() {
        return Err(Error::Config("no labeled cascades to calibrate on".into()));
    }
    let mut dtgs = grid.dtg.clone();
    let mut gs = grid.g.clone();
    dtgs.sort_by(f64::total_cmp);
    gs.sort_by(f64::total_cmp);
    let n = cases.len() as f64;
    let mut best: Option<Calibration> = None;
    for &dtg in &dtgs {
        for &g in &gs {
            let thresholds = InhibitionThresholds { dtg, g };
            thresholds.validate()?;
            let (mut we, mut te) = (0.0, 0.0);
            for case in cases {
                let (a, b) = case_errors(case, detect_inhibition(case.cascade, case.t_steep, &thresholds));
                we += a;
                te += b;
            }
            let cand = Calibration {
                thresholds,
                window_error: we / n,
                time_error: te / n,
            };
            let better = best.is_none_or(|b| {
                (cand.window_error, cand.time_error) < (b.window_error, b.time_error)
            });
            if better {
                best = Some(cand);
            }
        }
    }
    Ok(best.expect("non-empty grid"))
}
