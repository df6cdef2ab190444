//! Cascade data model: reshare events, cascades, the historical diffusion
//! network, growth curves, growth-shape classification and co-rating cascades.
//!
//! All times are minutes. Every cascade is rebased so that its first event
//! happens at time zero.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interned user identifier, dense over a [`UserRegistry`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserId(pub u32);

/// Bidirectional map between external user names and [`UserId`]s.
#[derive(Clone, Debug, Default)]
pub struct UserRegistry {
    names: Vec<String>,
    index: HashMap<String, UserId>,
}

impl UserRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), UserId(i as u32)).is_some() {
                return Err(Error::Data(format!("duplicate user name {name:?}")));
            }
        }
        Ok(UserRegistry { names, index })
    }

    pub fn intern(&mut self, name: &str) -> UserId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = UserId(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<UserId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: UserId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// `target` reshared from `source` at `time` minutes after the cascade start.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReshareEvent {
    pub source: UserId,
    pub target: UserId,
    pub time: f64,
}

/// A single information cascade.
///
/// Invariants: events are sorted by time, the first event is at time zero, no
/// event is a self-reshare, exact duplicate events are removed, and
/// `participants` lists every user in order of first appearance.
#[derive(Clone, Debug, PartialEq)]
pub struct Cascade {
    id: String,
    events: Vec<ReshareEvent>,
    participants: Vec<UserId>,
}

impl Cascade {
    /// Validates, sorts, deduplicates and rebases `events`.
    pub fn new(id: impl Into<String>, mut events: Vec<ReshareEvent>) -> Result<Self> {
        let id = id.into();
        if events.is_empty() {
            return Err(Error::Data(format!("cascade {id:?} has no events")));
        }
        for e in &events {
            if e.source == e.target {
                return Err(Error::Data(format!(
                    "cascade {id:?}: user {} reshares from itself",
                    e.source.0
                )));
            }
            if !e.time.is_finite() {
                return Err(Error::Data(format!("cascade {id:?}: non-finite event time")));
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        let start = events[0].time;
        let mut seen = HashSet::with_capacity(events.len());
        events.retain(|e| seen.insert((e.source, e.target, e.time.to_bits())));
        for e in &mut events {
            e.time -= start;
            if e.time < 0.0 {
                return Err(Error::Data(format!("cascade {id:?}: negative time after rebase")));
            }
        }

        let mut participants = Vec::new();
        let mut known = HashSet::new();
        for e in &events {
            for u in [e.source, e.target] {
                if known.insert(u) {
                    participants.push(u);
                }
            }
        }
        Ok(Cascade {
            id,
            events,
            participants,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn events(&self) -> &[ReshareEvent] {
        &self.events
    }

    pub fn participants(&self) -> &[UserId] {
        &self.participants
    }

    pub fn size(&self) -> usize {
        self.participants.len()
    }

    /// Time of the last event (the cascade lifetime `T_C`).
    pub fn lifetime(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.time)
    }

    /// For every event, the number of distinct participants seen up to and
    /// including it.
    pub fn cumulative_sizes(&self) -> Vec<usize> {
        let mut known = HashSet::new();
        self.events
            .iter()
            .map(|e| {
                known.insert(e.source);
                known.insert(e.target);
                known.len()
            })
            .collect()
    }
}

/// Undirected historical interaction network over the global user population.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiffusionNetwork {
    edges: HashSet<(UserId, UserId)>,
    adjacency: HashMap<UserId, Vec<UserId>>,
}

impl DiffusionNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(u: UserId, v: UserId) -> (UserId, UserId) {
        if u <= v {
            (u, v)
        } else {
            (v, u)
        }
    }

    /// Inserts `{u, v}`; returns `false` for self-loops and existing edges.
    pub fn insert(&mut self, u: UserId, v: UserId) -> bool {
        if u == v || !self.edges.insert(Self::key(u, v)) {
            return false;
        }
        self.adjacency.entry(u).or_default().push(v);
        self.adjacency.entry(v).or_default().push(u);
        true
    }

    pub fn remove(&mut self, u: UserId, v: UserId) -> bool {
        if !self.edges.remove(&Self::key(u, v)) {
            return false;
        }
        for (a, b) in [(u, v), (v, u)] {
            if let Some(list) = self.adjacency.get_mut(&a) {
                list.retain(|&x| x != b);
            }
        }
        true
    }

    pub fn contains(&self, u: UserId, v: UserId) -> bool {
        self.edges.contains(&Self::key(u, v))
    }

    pub fn neighbors(&self, u: UserId) -> &[UserId] {
        self.adjacency.get(&u).map_or(&[], Vec::as_slice)
    }

    pub fn degree(&self, u: UserId) -> usize {
        self.neighbors(u).len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn average_degree(&self) -> f64 {
        if self.adjacency.is_empty() {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.adjacency.len() as f64
        }
    }

    /// Edges as `(min, max)` pairs in sorted order.
    pub fn sorted_edges(&self) -> Vec<(UserId, UserId)> {
        let mut e: Vec<_> = self.edges.iter().copied().collect();
        e.sort_unstable();
        e
    }

    pub fn extend_from(&mut self, other: &DiffusionNetwork) {
        for &(u, v) in &other.edges {
            self.insert(u, v);
        }
    }
}

/// Result of parsing a diffusion edge list.
#[derive(Clone, Debug)]
pub struct ParsedDiffusion {
    pub network: DiffusionNetwork,
    pub self_loops_dropped: usize,
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str], source_name: &str) -> Result<()> {
    let header = reader.headers()?;
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Parse {
            source_name: source_name.to_owned(),
            line: 1,
            message: format!("expected header {:?}, found {:?}", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn parse_err(source_name: &str, record: &csv::StringRecord, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_owned(),
        line: record.position().map_or(0, |p| p.line()),
        message: message.into(),
    }
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input)
}

fn field<'r>(
    source_name: &str,
    record: &'r csv::StringRecord,
    index: usize,
    width: usize,
) -> Result<&'r str> {
    if record.len() != width {
        return Err(parse_err(
            source_name,
            record,
            format!("expected {width} fields, found {}", record.len()),
        ));
    }
    let value = &record[index];
    if value.is_empty() {
        return Err(parse_err(source_name, record, format!("field {} is empty", index + 1)));
    }
    Ok(value)
}

fn parse_time(source_name: &str, record: &csv::StringRecord, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|t| t.is_finite())
        .ok_or_else(|| parse_err(source_name, record, format!("time {raw:?} is not a finite number")))
}

/// Parses a `cascade_id,source,target,time` log into cascades sorted by id.
///
/// Within a cascade, records are ordered by `(time, source, target)` before
/// users are interned, so the result does not depend on record order.
pub fn parse_cascade_log<R: Read>(input: R, source_name: &str, users: &mut UserRegistry) -> Result<Vec<Cascade>> {
    let mut reader = csv_reader(input);
    check_header(&mut reader, &["cascade_id", "source", "target", "time"], source_name)?;

    let mut grouped: BTreeMap<String, Vec<(f64, String, String)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let id = field(source_name, &record, 0, 4)?;
        let source = field(source_name, &record, 1, 4)?;
        let target = field(source_name, &record, 2, 4)?;
        let time = parse_time(source_name, &record, field(source_name, &record, 3, 4)?)?;
        if source == target {
            let line = record.position().map_or(0, |p| p.line());
            return Err(Error::Data(format!(
                "{source_name}:{line}: user {source:?} reshares from itself"
            )));
        }
        grouped
            .entry(id.to_owned())
            .or_default()
            .push((time, source.to_owned(), target.to_owned()));
    }

    grouped
        .into_iter()
        .map(|(id, mut records)| {
            records.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)).then_with(|| a.2.cmp(&b.2)));
            let events = records
                .iter()
                .map(|(time, s, t)| ReshareEvent {
                    source: users.intern(s),
                    target: users.intern(t),
                    time: *time,
                })
                .collect();
            Cascade::new(id, events)
        })
        .collect()
}

/// Writes cascades in the canonical log format.
pub fn write_cascade_log<W: Write>(out: W, cascades: &[Cascade], users: &UserRegistry) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cascade_id", "source", "target", "time"])?;
    for c in cascades {
        for e in c.events() {
            w.write_record([
                c.id(),
                users.name(e.source),
                users.name(e.target),
                &format!("{}", e.time),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<cascade log>", e))?;
    Ok(())
}

/// Parses a `u,v` edge list. Duplicates (in either orientation) collapse into
/// one edge; self-loops are dropped and counted.
pub fn parse_diffusion_edges<R: Read>(input: R, source_name: &str, users: &mut UserRegistry) -> Result<ParsedDiffusion> {
    let mut reader = csv_reader(input);
    check_header(&mut reader, &["u", "v"], source_name)?;
    let mut network = DiffusionNetwork::new();
    let mut self_loops_dropped = 0;
    for record in reader.records() {
        let record = record?;
        let u = users.intern(field(source_name, &record, 0, 2)?);
        let v = users.intern(field(source_name, &record, 1, 2)?);
        if u == v {
            self_loops_dropped += 1;
            continue;
        }
        network.insert(u, v);
    }
    if self_loops_dropped > 0 {
        log::warn!("{source_name}: dropped {self_loops_dropped} self-loop(s)");
    }
    Ok(ParsedDiffusion {
        network,
        self_loops_dropped,
    })
}

/// Writes edges sorted by user name pair so output is independent of interning order.
pub fn write_diffusion_edges<W: Write>(out: W, network: &DiffusionNetwork, users: &UserRegistry) -> Result<()> {
    let mut rows: Vec<(&str, &str)> = network
        .sorted_edges()
        .into_iter()
        .map(|(u, v)| {
            let (a, b) = (users.name(u), users.name(v));
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    rows.sort_unstable();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u", "v"])?;
    for (a, b) in rows {
        w.write_record([a, b])?;
    }
    w.flush().map_err(|e| Error::io("<diffusion edges>", e))?;
    Ok(())
}

/// Keeps cascades with strictly more than `min_participants` participants.
pub fn filter_by_size(cascades: Vec<Cascade>, min_participants: usize) -> Vec<Cascade> {
    cascades.into_iter().filter(|c| c.size() > min_participants).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub time: f64,
    pub size: usize,
}

/// Cumulative cascade size over time, one point per event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCurve {
    pub points: Vec<CurvePoint>,
}

impl GrowthCurve {
    /// Size after every event with time `<= t` (zero before the first event).
    pub fn size_at(&self, t: f64) -> usize {
        let idx = self.points.partition_point(|p| p.time <= t);
        if idx == 0 {
            0
        } else {
            self.points[idx - 1].size
        }
    }

    pub fn final_size(&self) -> usize {
        self.points.last().map_or(0, |p| p.size)
    }

    pub fn duration(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.time)
    }
}

pub fn growth_curve(cascade: &Cascade) -> GrowthCurve {
    let points = cascade
        .events()
        .iter()
        .zip(cascade.cumulative_sizes())
        .map(|(e, size)| CurvePoint { time: e.time, size })
        .collect();
    GrowthCurve { points }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CascadeType {
    /// Smooth logistic growth with an early steep phase.
    TypeI,
    /// Step-like growth with several phases.
    TypeII,
    /// Linear or concave growth, usually an unfinished lifecycle.
    TypeIII,
}

impl fmt::Display for CascadeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CascadeType::TypeI => "TypeI",
            CascadeType::TypeII => "TypeII",
            CascadeType::TypeIII => "TypeIII",
        })
    }
}

impl std::str::FromStr for CascadeType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TypeI" => Ok(CascadeType::TypeI),
            "TypeII" => Ok(CascadeType::TypeII),
            "TypeIII" => Ok(CascadeType::TypeIII),
            other => Err(Error::Config(format!("unknown cascade type {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// A Type I cascade must reach its steepest growth before this fraction
    /// of its lifetime.
    pub steep_time_fraction_threshold: f64,
    /// Number of equal-width time bins used to locate the steepest growth.
    pub slope_bins: usize,
    /// Number of uniformly spaced samples used for the curve fits.
    pub fit_samples: usize,
    /// A line or concave fit must get its RMS residual below this to make a
    /// curve Type III. Curves no single-phase shape fits are Type II.
    pub single_phase_rms: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            steep_time_fraction_threshold: 0.15,
            slope_bins: 20,
            fit_samples: 101,
            single_phase_rms: 0.06,
        }
    }
}

/// Shape diagnostics of a growth curve rescaled to the unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveFits {
    /// Start of the steepest time bin as a fraction of the lifetime.
    pub steep_fraction: f64,
    pub line_rms: f64,
    pub concave_rms: f64,
    pub logistic_rms: f64,
}

/// Samples the curve on a uniform grid of the unit square.
pub(crate) fn rescaled_samples(curve: &GrowthCurve, samples: usize) -> Result<Vec<(f64, f64)>> {
    if curve.points.len() < 3 {
        return Err(Error::Classification(format!(
            "growth curve has {} points, need at least 3",
            curve.points.len()
        )));
    }
    let duration = curve.duration();
    let lo = curve.points[0].size as f64;
    let hi = curve.final_size() as f64;
    if duration <= 0.0 || hi <= lo {
        return Err(Error::Classification("growth curve is degenerate (no time span or no growth)".into()));
    }
    let samples = samples.max(3);
    Ok((0..samples)
        .map(|i| {
            let x = i as f64 / (samples - 1) as f64;
            let y = (curve.size_at(x * duration) as f64 - lo) / (hi - lo);
            (x, y)
        })
        .collect())
}

fn rms(points: &[(f64, f64)], f: impl Fn(f64) -> f64) -> f64 {
    let sse: f64 = points.iter().map(|&(x, y)| (y - f(x)).powi(2)).sum();
    (sse / points.len() as f64).sqrt()
}

pub(crate) fn logistic(x: f64, rate: f64, mid: f64) -> f64 {
    1.0 / (1.0 + (-rate * (x - mid)).exp())
}

/// Saturating curve through (0,0) and (1,1); tends to the diagonal as
/// `scale` grows.
pub(crate) fn concave(x: f64, scale: f64) -> f64 {
    (1.0 - (-x / scale).exp()) / (1.0 - (-1.0 / scale).exp())
}

fn fit_line(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    rms(points, |x| icpt + slope * x)
}

fn fit_concave(points: &[(f64, f64)]) -> f64 {
    // golden-section search over log(scale)
    let f = |ls: f64| rms(points, |x| concave(x, ls.exp()));
    let (mut a, mut b) = ((0.005f64).ln(), (1000.0f64).ln());
    // coarse bracket first: the objective need not be unimodal on the full range
    let steps = 60;
    let mut best = (f64::INFINITY, a);
    for i in 0..=steps {
        let ls = a + (b - a) * i as f64 / steps as f64;
        let v = f(ls);
        if v < best.0 {
            best = (v, ls);
        }
    }
    let width = (b - a) / steps as f64;
    a = best.1 - width;
    b = best.1 + width;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..60 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    f(0.5 * (a + b)).min(best.0)
}

fn fit_logistic(points: &[(f64, f64)]) -> f64 {
    let f = |lr: f64, m: f64| rms(points, |x| logistic(x, lr.exp(), m));
    let (lr_lo, lr_hi) = ((0.5f64).ln(), (400.0f64).ln());
    let (m_lo, m_hi) = (-0.5, 1.5);
    let steps = 40;
    let mut best = (f64::INFINITY, lr_lo, m_lo);
    for i in 0..=steps {
        let lr = lr_lo + (lr_hi - lr_lo) * i as f64 / steps as f64;
        for j in 0..=steps {
            let m = m_lo + (m_hi - m_lo) * j as f64 / steps as f64;
            let v = f(lr, m);
            if v < best.0 {
                best = (v, lr, m);
            }
        }
    }
    // compass search around the best grid cell
    let (mut step_lr, mut step_m) = ((lr_hi - lr_lo) / steps as f64, (m_hi - m_lo) / steps as f64);
    let (mut val, mut lr, mut m) = best;
    for _ in 0..200 {
        let mut improved = false;
        for (dlr, dm) in [(step_lr, 0.0), (-step_lr, 0.0), (0.0, step_m), (0.0, -step_m)] {
            let v = f(lr + dlr, m + dm);
            if v < val {
                val = v;
                lr += dlr;
                m += dm;
                improved = true;
            }
        }
        if !improved {
            step_lr *= 0.5;
            step_m *= 0.5;
            if step_lr < 1e-7 && step_m < 1e-9 {
                break;
            }
        }
    }
    val
}

pub fn curve_fits(curve: &GrowthCurve, config: &ClassifyConfig) -> Result<CurveFits> {
    let points = rescaled_samples(curve, config.fit_samples)?;
    let bins = config.slope_bins.max(2);
    let duration = curve.duration();
    let mut steep_bin = 0;
    let mut steep_slope = i64::MIN;
    for b in 0..bins {
        let t0 = duration * b as f64 / bins as f64;
        let t1 = duration * (b + 1) as f64 / bins as f64;
        // sizes are counted from the curve itself, not the resampled grid
        let before = if b == 0 { curve.points[0].size } else { curve.size_at(t0) };
        let rise = curve.size_at(t1) as i64 - before as i64;
        if rise > steep_slope {
            steep_slope = rise;
            steep_bin = b;
        }
    }
    Ok(CurveFits {
        steep_fraction: steep_bin as f64 / bins as f64,
        line_rms: fit_line(&points),
        concave_rms: fit_concave(&points),
        logistic_rms: fit_logistic(&points),
    })
}

/// Type I: steepest growth early and a logistic beats a straight line.
/// Type III: a line or saturating concave curve fits closely and at least as
/// well as the logistic. Type II: everything else.
pub fn classify_cascade_type(curve: &GrowthCurve, config: &ClassifyConfig) -> Result<CascadeType> {
    let fits = curve_fits(curve, config)?;
    Ok(classify_fits(&fits, config))
}

pub fn classify_fits(fits: &CurveFits, config: &ClassifyConfig) -> CascadeType {
    if fits.steep_fraction < config.steep_time_fraction_threshold && fits.logistic_rms < fits.line_rms {
        CascadeType::TypeI
    } else if fits.line_rms.min(fits.concave_rms) <= fits.logistic_rms.min(config.single_phase_rms) {
        CascadeType::TypeIII
    } else {
        CascadeType::TypeII
    }
}

/// One rating of `item` by `user`, `time_hours` hours from an arbitrary epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct Rating {
    pub user: UserId,
    pub item: String,
    pub time_hours: f64,
}

pub fn parse_ratings<R: Read>(input: R, source_name: &str, users: &mut UserRegistry) -> Result<Vec<Rating>> {
    let mut reader = csv_reader(input);
    check_header(&mut reader, &["user", "item", "time_hours"], source_name)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let user = users.intern(field(source_name, &record, 0, 3)?);
        let item = field(source_name, &record, 1, 3)?.to_owned();
        let time_hours = parse_time(source_name, &record, field(source_name, &record, 2, 3)?)?;
        out.push(Rating { user, item, time_hours });
    }
    Ok(out)
}

/// Builds one cascade per item by linking every two users who rated it
/// within `window_hours` of each other (inclusive). The link is stamped with
/// the later of the two rating times; the earlier rater is recorded as the
/// source. A user's repeated ratings of one item count once, at the earliest.
pub fn build_corating_cascades(ratings: &[Rating], window_hours: f64) -> Result<Vec<Cascade>> {
    if !(window_hours > 0.0) {
        return Err(Error::Config(format!("co-rating window must be positive, got {window_hours}")));
    }
    let mut per_item: BTreeMap<&str, HashMap<UserId, f64>> = BTreeMap::new();
    for r in ratings {
        let slot = per_item.entry(&r.item).or_default().entry(r.user).or_insert(r.time_hours);
        if r.time_hours < *slot {
            *slot = r.time_hours;
        }
    }

    let mut cascades = Vec::new();
    for (item, by_user) in per_item {
        let mut raters: Vec<(f64, UserId)> = by_user.into_iter().map(|(u, t)| (t, u)).collect();
        raters.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut events = Vec::new();
        for (i, &(ti, ui)) in raters.iter().enumerate() {
            for &(tj, uj) in &raters[i + 1..] {
                if tj - ti > window_hours {
                    break;
                }
                events.push(ReshareEvent {
                    source: ui,
                    target: uj,
                    time: tj * 60.0,
                });
            }
        }
        if !events.is_empty() {
            cascades.push(Cascade::new(item, events)?);
        }
    }
    Ok(cascades)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: u32, t: u32, time: f64) -> ReshareEvent {
        ReshareEvent {
            source: UserId(s),
            target: UserId(t),
            time,
        }
    }

    #[test]
    fn log_is_grouped_sorted_and_rebased() {
        let log = "cascade_id,source,target,time\nc1,a,b,15\nc1,a,c,10\nc1,b,d,12\n";
        let mut users = UserRegistry::new();
        let cs = parse_cascade_log(log.as_bytes(), "log", &mut users).unwrap();
        assert_eq!(cs.len(), 1);
        let times: Vec<f64> = cs[0].events().iter().map(|e| e.time).collect();
        assert_eq!(times, vec![0.0, 2.0, 5.0]);
        let names: Vec<&str> = cs[0].participants().iter().map(|&u| users.name(u)).collect();
        assert_eq!(names, vec!["a", "c", "b", "d"]);
    }

    #[test]
    fn empty_log_gives_no_cascades() {
        let mut users = UserRegistry::new();
        let cs = parse_cascade_log("cascade_id,source,target,time\n".as_bytes(), "log", &mut users).unwrap();
        assert!(cs.is_empty());
    }

    #[test]
    fn self_reshare_is_a_data_error() {
        let mut users = UserRegistry::new();
        let err = parse_cascade_log(
            "cascade_id,source,target,time\nc1,a,b,0\nc1,x,x,3\n".as_bytes(),
            "log",
            &mut users,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Data(ref m) if m.contains("log:3")), "{err}");
    }

    #[test]
    fn malformed_records_report_their_line() {
        let mut users = UserRegistry::new();
        let err = parse_cascade_log(
            "cascade_id,source,target,time\nc1,a,b,0\nc1,b,c,soon\n".as_bytes(),
            "log",
            &mut users,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_cascade_log("cascade_id,source,target,time\nc1,a\n".as_bytes(), "log", &mut users)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_cascade_log("id,src,dst,t\n".as_bytes(), "log", &mut users).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn duplicate_events_collapse_but_repeat_edges_stay() {
        let c = Cascade::new("c", vec![ev(0, 1, 0.0), ev(0, 1, 0.0), ev(0, 2, 1.0), ev(1, 2, 2.0)]).unwrap();
        assert_eq!(c.events().len(), 3);
        assert_eq!(c.participants(), &[UserId(0), UserId(1), UserId(2)]);
    }

    #[test]
    fn diffusion_edges_dedup_and_drop_loops() {
        let mut users = UserRegistry::new();
        let p = parse_diffusion_edges("u,v\na,b\nb,a\na,b\n".as_bytes(), "d", &mut users).unwrap();
        assert_eq!(p.network.edge_count(), 1);
        let p = parse_diffusion_edges("u,v\na,a\n".as_bytes(), "d", &mut users).unwrap();
        assert_eq!(p.network.edge_count(), 0);
        assert_eq!(p.self_loops_dropped, 1);
        let p = parse_diffusion_edges("u,v\na,b\nb,c\nc,d\n".as_bytes(), "d", &mut users).unwrap();
        assert_eq!(p.network.edge_count(), 3);
        assert!((p.network.average_degree() - 1.5).abs() < 1e-12);
        assert!(parse_diffusion_edges("u,v\na\n".as_bytes(), "d", &mut users).is_err());
    }

    fn cascade_of_size(n: u32) -> Cascade {
        Cascade::new("c", (1..n).map(|i| ev(0, i, i as f64)).collect()).unwrap()
    }

    #[test]
    fn size_filter_is_strict() {
        assert!(filter_by_size(vec![cascade_of_size(300)], 300).is_empty());
        assert_eq!(filter_by_size(vec![cascade_of_size(301)], 300).len(), 1);
        assert!(filter_by_size(vec![], 300).is_empty());
    }

    #[test]
    fn growth_curve_counts_distinct_users() {
        // A->B, A->C, B->C
        let c = Cascade::new("c", vec![ev(0, 1, 0.0), ev(0, 2, 1.0), ev(1, 2, 2.0)]).unwrap();
        let sizes: Vec<usize> = growth_curve(&c).points.iter().map(|p| p.size).collect();
        assert_eq!(sizes, vec![2, 3, 3]);
        let single = Cascade::new("s", vec![ev(0, 1, 4.0)]).unwrap();
        let g = growth_curve(&single);
        assert_eq!(g.points, vec![CurvePoint { time: 0.0, size: 2 }]);
        assert_eq!(g.size_at(-1.0), 0);
    }

    #[test]
    fn classification_needs_three_points() {
        let c = Cascade::new("c", vec![ev(0, 1, 0.0), ev(0, 2, 1.0)]).unwrap();
        assert!(matches!(
            classify_cascade_type(&growth_curve(&c), &ClassifyConfig::default()),
            Err(Error::Classification(_))
        ));
    }

    fn curve_from(f: impl Fn(f64) -> f64, n: usize) -> GrowthCurve {
        // participant j arrives at the time where the target shape reaches j/n
        let points = (0..n)
            .map(|j| {
                let q = j as f64 / (n - 1) as f64;
                CurvePoint {
                    time: f(q),
                    size: j + 2,
                }
            })
            .collect();
        GrowthCurve { points }
    }

    #[test]
    fn straight_line_is_type_three() {
        let line = curve_from(|q| 1000.0 * q, 400);
        let fits = curve_fits(&line, &ClassifyConfig::default()).unwrap();
        assert!(fits.line_rms < fits.logistic_rms);
        assert_eq!(classify_cascade_type(&line, &ClassifyConfig::default()).unwrap(), CascadeType::TypeIII);
    }

    #[test]
    fn early_logistic_is_type_one() {
        // logistic truncated at t >= 0 with rate*midpoint = 0.4, long tail
        let (r, m) = (0.02, 20.0);
        let f0 = logistic(0.0, r, m);
        let curve = curve_from(
            |q| {
                let u = f0 + q * (0.998 - f0);
                m + (u / (1.0 - u)).ln() / r
            },
            400,
        );
        assert_eq!(classify_cascade_type(&curve, &ClassifyConfig::default()).unwrap(), CascadeType::TypeI);
    }

    #[test]
    fn staircase_is_type_two() {
        // two equal logistic steps at 30% and 75% of the lifetime
        let step = |t: f64, mid: f64| 1.0 / (1.0 + (-(t - mid) / 12.0).exp());
        let size = |t: f64| 0.5 * step(t, 300.0) + 0.5 * step(t, 750.0);
        let (lo, hi) = (size(0.0), size(1000.0));
        let curve = curve_from(
            |q| {
                let target = lo + q * (hi - lo);
                let (mut a, mut b) = (0.0, 1000.0);
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    if size(mid) < target {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                0.5 * (a + b)
            },
            400,
        );
        let config = ClassifyConfig::default();
        let fits = curve_fits(&curve, &config).unwrap();

        // independent ordinary least-squares line on the same samples
        let pts = rescaled_samples(&curve, config.fit_samples).unwrap();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / n, sy / n);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let ols_rms = (pts.iter().map(|p| (my + slope * (p.0 - mx) - p.1).powi(2)).sum::<f64>() / n).sqrt();
        assert!(fits.line_rms <= ols_rms + 1e-9);

        assert!(fits.steep_fraction >= config.steep_time_fraction_threshold);
        assert!(fits.line_rms.min(fits.concave_rms) > config.single_phase_rms, "{fits:?}");
        assert_eq!(classify_fits(&fits, &config), CascadeType::TypeII);
    }

    #[test]
    fn corating_window_rule() {
        let mut users = UserRegistry::new();
        let (a, b, c) = (users.intern("A"), users.intern("B"), users.intern("C"));
        let r = |u, t| Rating {
            user: u,
            item: "m".into(),
            time_hours: t,
        };
        let cs = build_corating_cascades(&[r(a, 0.0), r(b, 12.0), r(c, 48.0)], 24.0).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].events().len(), 1);
        assert_eq!((cs[0].events()[0].source, cs[0].events()[0].target), (a, b));

        let cs = build_corating_cascades(&[r(a, 0.0), r(b, 24.0)], 24.0).unwrap();
        assert_eq!(cs[0].events().len(), 1, "boundary is inclusive");

        assert!(build_corating_cascades(&[], 0.0).is_err());
    }

    #[test]
    fn corating_four_close_users_form_all_pairs() {
        let mut users = UserRegistry::new();
        let ratings: Vec<Rating> = (0..4)
            .map(|i| Rating {
                user: users.intern(&format!("u{i}")),
                item: "m".into(),
                time_hours: 0.2 * i as f64,
            })
            .collect();
        let cs = build_corating_cascades(&ratings, 1.0).unwrap();
        // brute force over all pairs
        let mut expected = 0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                if (ratings[i].time_hours - ratings[j].time_hours).abs() <= 1.0 {
                    expected += 1;
                }
            }
        }
        assert_eq!(expected, 6);
        assert_eq!(cs[0].events().len(), expected);
    }
}
