//! The mixed-integer model: event-time variables, one overlap variable and one
//! indicator per synchronization pair, scheduling windows as linear rows, and
//! indicator rows made exact through per-pair big-M constants derived from the
//! event domains.

pub mod mps;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::network::{ModelParams, PlatformIdx, RailNetwork, TrainIdx, Window};
use crate::pairing::{SyncPair, SyncPairs};
use crate::timetable::Timetable;

/// Index into [`MipModel::vars`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Arrival(TrainIdx, PlatformIdx),
    Departure(TrainIdx, PlatformIdx),
    /// Realized overlap (seconds) of a pair, by pair index.
    Overlap(usize),
    /// Binary synchronization indicator of a pair, by pair index.
    Indicator(usize),
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lo: f64,
    /// `f64::INFINITY` when unbounded above.
    pub hi: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

/// Families of model rows; also the tags used for MPS row names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowFamily {
    Trip,
    Dwell,
    Connection,
    Turnaround,
    Headway,
    Travel,
    /// Keeps the partner's dwell midpoint on the pair's side.
    Order,
    /// Indicator on: the brake arrival may trail the accel departure by at
    /// most the two phase durations.
    GapMax,
    /// Indicator on: the brake arrival must strictly follow the accel departure.
    GapMin,
    /// Overlap capped by the acceleration-phase duration.
    CapAccel,
    /// Overlap capped by the braking-phase duration.
    CapBrake,
    /// Overlap capped by the span from braking start to acceleration end.
    CapWindow,
    /// Overlap capped by the gap from acceleration start to braking end.
    CapGap,
}

impl RowFamily {
    /// Three-character tag used in row names.
    pub fn tag(self) -> &'static str {
        match self {
            RowFamily::Trip => "TRP",
            RowFamily::Dwell => "DWL",
            RowFamily::Connection => "CON",
            RowFamily::Turnaround => "TRN",
            RowFamily::Headway => "HDW",
            RowFamily::Travel => "TRV",
            RowFamily::Order => "ORD",
            RowFamily::GapMax => "GMX",
            RowFamily::GapMin => "GMN",
            RowFamily::CapAccel => "CPA",
            RowFamily::CapBrake => "CPB",
            RowFamily::CapWindow => "CPW",
            RowFamily::CapGap => "CPG",
        }
    }

    pub const ALL: [RowFamily; 13] = [
        RowFamily::Trip,
        RowFamily::Dwell,
        RowFamily::Connection,
        RowFamily::Turnaround,
        RowFamily::Headway,
        RowFamily::Travel,
        RowFamily::Order,
        RowFamily::GapMax,
        RowFamily::GapMin,
        RowFamily::CapAccel,
        RowFamily::CapBrake,
        RowFamily::CapWindow,
        RowFamily::CapGap,
    ];
}

impl fmt::Display for RowFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RowFamily::Trip => "trip",
            RowFamily::Dwell => "dwell",
            RowFamily::Connection => "connection",
            RowFamily::Turnaround => "turnaround",
            RowFamily::Headway => "headway",
            RowFamily::Travel => "travel",
            RowFamily::Order => "order",
            RowFamily::GapMax => "gap_max",
            RowFamily::GapMin => "gap_min",
            RowFamily::CapAccel => "cap_accel",
            RowFamily::CapBrake => "cap_brake",
            RowFamily::CapWindow => "cap_window",
            RowFamily::CapGap => "cap_gap",
        };
        f.write_str(s)
    }
}

/// One linear row: `terms (sense) rhs`.
#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub family: RowFamily,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn lhs_value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * x[v.0]).sum()
    }

    /// Signed slack at `x`: negative iff the row is violated.
    pub fn slack(&self, x: &[f64]) -> f64 {
        match self.sense {
            Sense::Le => self.rhs - self.lhs_value(x),
            Sense::Ge => self.lhs_value(x) - self.rhs,
        }
    }
}

/// How big-M constants are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BigMMode {
    /// Per-pair constants derived from the event-time boxes; requires a finite
    /// deviation limit.
    Auto,
    /// One global constant, emitted as-is for every pair.
    Fixed(f64),
}

/// Overlap and indicator variable ids of one pair.
#[derive(Debug, Clone, Copy)]
pub struct PairVars {
    pub sigma: VarId,
    pub lambda: VarId,
}

#[derive(Debug, Clone)]
pub struct MipModel {
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Maximized objective: exactly coefficient 1 on each overlap variable.
    pub objective: Vec<(VarId, f64)>,
    /// Pairs in canonical order (right pairs then left pairs, each sorted);
    /// pair indices everywhere refer to this vector.
    pub pairs: Vec<SyncPair>,
    pub pair_vars: Vec<PairVars>,
    /// (arrival, departure) variable ids per (train, platform).
    pub event_vars: BTreeMap<(TrainIdx, PlatformIdx), (VarId, VarId)>,
    /// Big-M constant per pair.
    pub big_m: Vec<f64>,
    pub epsilon: f64,
    pub big_m_mode: BigMMode,
}

impl MipModel {
    pub fn arrival(&self, t: TrainIdx, p: PlatformIdx) -> Result<VarId> {
        self.event_vars
            .get(&(t, p))
            .map(|&(a, _)| a)
            .ok_or_else(|| Error::Invalid(format!("no arrival variable for ({t:?}, {p:?})")))
    }

    pub fn departure(&self, t: TrainIdx, p: PlatformIdx) -> Result<VarId> {
        self.event_vars
            .get(&(t, p))
            .map(|&(_, d)| d)
            .ok_or_else(|| Error::Invalid(format!("no departure variable for ({t:?}, {p:?})")))
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * x[v.0]).sum()
    }

    pub fn stats(&self) -> ModelStats {
        let binaries = self.vars.iter().filter(|v| v.integer).count();
        let mut family_counts = BTreeMap::new();
        for row in &self.rows {
            *family_counts.entry(row.family).or_insert(0usize) += 1;
        }
        let (mut m_min, mut m_max, mut m_sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for &m in &self.big_m {
            m_min = m_min.min(m);
            m_max = m_max.max(m);
            m_sum += m;
        }
        ModelStats {
            rows: self.rows.len(),
            columns: self.vars.len(),
            binaries,
            continuous: self.vars.len() - binaries,
            family_counts,
            big_m_min: if self.big_m.is_empty() { 0.0 } else { m_min },
            big_m_max: if self.big_m.is_empty() { 0.0 } else { m_max },
            big_m_mean: if self.big_m.is_empty() {
                0.0
            } else {
                m_sum / self.big_m.len() as f64
            },
        }
    }
}

/// Size and composition summary of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelStats {
    pub rows: usize,
    pub columns: usize,
    pub binaries: usize,
    pub continuous: usize,
    pub family_counts: BTreeMap<RowFamily, usize>,
    pub big_m_min: f64,
    pub big_m_max: f64,
    pub big_m_mean: f64,
}

impl fmt::Display for ModelStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows        {}", self.rows)?;
        writeln!(f, "columns     {}", self.columns)?;
        writeln!(f, "binaries    {}", self.binaries)?;
        writeln!(f, "continuous  {}", self.continuous)?;
        for family in RowFamily::ALL {
            if let Some(n) = self.family_counts.get(&family) {
                writeln!(f, "rows[{:<10}] {}", family.to_string(), n)?;
            }
        }
        if self.big_m_max > 0.0 {
            writeln!(
                f,
                "big-M       min {:.3}  mean {:.3}  max {:.3}",
                self.big_m_min, self.big_m_mean, self.big_m_max
            )?;
        }
        Ok(())
    }
}

/// Smallest big-M making the four indicator rows of a pair redundant when the
/// indicator is off, for any event times inside the given boxes: the maximum
/// over the four rows' interval-arithmetic requirements (floored at zero).
///
/// `dep` bounds the accelerating train's departure, `arr` the braking train's
/// arrival; `phase_sum` is the sum of the two duration lower bounds.
pub fn compute_big_m(
    dep: (f64, f64),
    arr: (f64, f64),
    phase_sum: f64,
    epsilon: f64,
) -> Option<f64> {
    let (dep_lo, dep_hi) = dep;
    let (arr_lo, arr_hi) = arr;
    if !(dep_lo.is_finite() && dep_hi.is_finite() && arr_lo.is_finite() && arr_hi.is_finite()) {
        return None;
    }
    let gap_max = (arr_hi - dep_lo) + epsilon - phase_sum;
    let gap_min = (dep_hi - arr_lo) + epsilon;
    let cap_window = (arr_hi - dep_lo) - phase_sum;
    let cap_gap = dep_hi - arr_lo;
    Some(
        0f64.max(gap_max)
            .max(gap_min)
            .max(cap_window)
            .max(cap_gap),
    )
}

/// Row-name generator: three-letter family tag plus a per-family counter.
struct RowNamer {
    counts: BTreeMap<RowFamily, usize>,
}

impl RowNamer {
    fn new() -> Self {
        RowNamer {
            counts: BTreeMap::new(),
        }
    }

    fn next(&mut self, family: RowFamily) -> Result<String> {
        let n = self.counts.entry(family).or_insert(0);
        if *n >= 99_999 {
            return Err(Error::MpsExport(format!(
                "too many {family} rows for the naming scheme"
            )));
        }
        let name = format!("{}{:05}", family.tag(), *n);
        *n += 1;
        Ok(name)
    }
}

struct ModelBuilder<'a> {
    net: &'a RailNetwork,
    params: &'a ModelParams,
    tt0: &'a Timetable,
    vars: Vec<Variable>,
    rows: Vec<Row>,
    event_vars: BTreeMap<(TrainIdx, PlatformIdx), (VarId, VarId)>,
    namer: RowNamer,
}

impl<'a> ModelBuilder<'a> {
    fn checked_window(&self, key: String, w: &Window) -> Result<Window> {
        if w.lo > w.hi {
            return Err(Error::ReversedWindow {
                key,
                lo: w.lo,
                hi: w.hi,
            });
        }
        Ok(*w)
    }

    fn trip_window(&self, t: TrainIdx, from: PlatformIdx, to: PlatformIdx) -> Result<Window> {
        let w = self
            .params
            .trip
            .get(&(t, from, to))
            .ok_or_else(|| Error::MissingWindow {
                kind: "trip",
                key: format!(
                    "({}, {}->{})",
                    self.net.train_id(t),
                    self.net.platform_id(from),
                    self.net.platform_id(to)
                ),
            })?;
        self.checked_window(
            format!("trip ({}, ...)", self.net.train_id(t)),
            w,
        )
    }

    fn add_event_vars(&mut self, mode: BigMMode) -> Result<()> {
        let deviation = self.params.deviation;
        if matches!(mode, BigMMode::Auto) && deviation.is_none() {
            return Err(Error::UnboundedBigM {
                pair: "(any)".to_string(),
            });
        }
        let mut event_no = 0usize;
        for (ti, train) in self.net.trains.iter().enumerate() {
            let t = TrainIdx(ti as u32);
            for (pos, &p) in train.path.iter().enumerate() {
                let init = self.tt0.at_position(t, pos);
                let bounds = |v: f64| match deviation {
                    Some(dev) => (f64::max(0.0, v - dev), v + dev),
                    None => (0.0, f64::INFINITY),
                };
                let (alo, ahi) = bounds(init.arrival);
                let (dlo, dhi) = bounds(init.departure);
                let a_id = VarId(self.vars.len());
                self.vars.push(Variable {
                    name: format!("A{event_no:07}"),
                    kind: VarKind::Arrival(t, p),
                    lo: alo,
                    hi: ahi,
                    integer: false,
                });
                let d_id = VarId(self.vars.len());
                self.vars.push(Variable {
                    name: format!("D{event_no:07}"),
                    kind: VarKind::Departure(t, p),
                    lo: dlo,
                    hi: dhi,
                    integer: false,
                });
                self.event_vars.insert((t, p), (a_id, d_id));
                event_no += 1;
            }
        }
        Ok(())
    }

    fn arrival(&self, t: TrainIdx, p: PlatformIdx) -> Result<VarId> {
        self.event_vars
            .get(&(t, p))
            .map(|&(a, _)| a)
            .ok_or_else(|| Error::MissingEvent {
                train: self.net.train_id(t).to_string(),
                platform: self.net.platform_id(p).to_string(),
            })
    }

    fn departure(&self, t: TrainIdx, p: PlatformIdx) -> Result<VarId> {
        self.event_vars
            .get(&(t, p))
            .map(|&(_, d)| d)
            .ok_or_else(|| Error::MissingEvent {
                train: self.net.train_id(t).to_string(),
                platform: self.net.platform_id(p).to_string(),
            })
    }

    fn push_row(
        &mut self,
        family: RowFamily,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<()> {
        let name = self.namer.next(family)?;
        self.rows.push(Row {
            name,
            family,
            terms,
            sense,
            rhs,
        });
        Ok(())
    }

    /// Both one-sided rows of a two-sided window on `expr`.
    fn push_window_rows(
        &mut self,
        family: RowFamily,
        terms: Vec<(VarId, f64)>,
        w: Window,
    ) -> Result<()> {
        self.push_row(family, terms.clone(), Sense::Ge, w.lo)?;
        self.push_row(family, terms, Sense::Le, w.hi)
    }

    fn emit_operational(&mut self) -> Result<()> {
        // Trips: arrival at the far end minus departure at the near end.
        for (ti, train) in self.net.trains.iter().enumerate() {
            let t = TrainIdx(ti as u32);
            for (from, to) in train.edges() {
                let w = self.trip_window(t, from, to)?;
                let terms = vec![(self.arrival(t, to)?, 1.0), (self.departure(t, from)?, -1.0)];
                self.push_window_rows(RowFamily::Trip, terms, w)?;
            }
        }

        // Dwells at every platform call, terminals included.
        for (ti, train) in self.net.trains.iter().enumerate() {
            let t = TrainIdx(ti as u32);
            for &p in &train.path {
                let w = *self
                    .params
                    .dwell
                    .get(&(t, p))
                    .ok_or_else(|| Error::MissingWindow {
                        kind: "dwell",
                        key: format!("({}, {})", train.id, self.net.platform_id(p)),
                    })?;
                let w = self.checked_window(
                    format!("dwell ({}, {})", train.id, self.net.platform_id(p)),
                    &w,
                )?;
                let terms = vec![(self.departure(t, p)?, 1.0), (self.arrival(t, p)?, -1.0)];
                self.push_window_rows(RowFamily::Dwell, terms, w)?;
            }
        }

        // Connections: partner departs j within a window of arrival at i.
        for c in &self.net.connections {
            let w = *self
                .params
                .connection
                .get(c)
                .ok_or_else(|| Error::MissingWindow {
                    kind: "connection",
                    key: format!(
                        "({}, {})",
                        self.net.train_id(c.t),
                        self.net.train_id(c.t_next)
                    ),
                })?;
            let w = self.checked_window(
                format!(
                    "connection ({}, {})",
                    self.net.train_id(c.t),
                    self.net.train_id(c.t_next)
                ),
                &w,
            )?;
            let terms = vec![
                (self.departure(c.t_next, c.j)?, 1.0),
                (self.arrival(c.t, c.i)?, -1.0),
            ];
            self.push_window_rows(RowFamily::Connection, terms, w)?;
        }

        // Turn-arounds: the continuation arrives at j within a window of the
        // departure from terminal i.
        for c in &self.net.turnarounds {
            let w = *self
                .params
                .turnaround
                .get(c)
                .ok_or_else(|| Error::MissingWindow {
                    kind: "turn-around",
                    key: format!(
                        "({}, {})",
                        self.net.train_id(c.t),
                        self.net.train_id(c.t_next)
                    ),
                })?;
            let w = self.checked_window(
                format!(
                    "turn-around ({}, {})",
                    self.net.train_id(c.t),
                    self.net.train_id(c.t_next)
                ),
                &w,
            )?;
            let terms = vec![
                (self.arrival(c.t_next, c.j)?, 1.0),
                (self.departure(c.t, c.i)?, -1.0),
            ];
            self.push_window_rows(RowFamily::Turnaround, terms, w)?;
        }

        // Headways: departure separation floors at both track endpoints.
        for c in &self.net.headways {
            let g = *self
                .params
                .headway
                .get(c)
                .ok_or_else(|| Error::MissingWindow {
                    kind: "headway",
                    key: format!(
                        "({}, {})",
                        self.net.train_id(c.t),
                        self.net.train_id(c.t_next)
                    ),
                })?;
            for (p, floor) in [(c.i, g.at_from), (c.j, g.at_to)] {
                let terms = vec![
                    (self.departure(c.t_next, p)?, 1.0),
                    (self.departure(c.t, p)?, -1.0),
                ];
                self.push_row(RowFamily::Headway, terms, Sense::Ge, floor)?;
            }
        }

        // Total travel: last arrival minus first departure.
        for (ti, train) in self.net.trains.iter().enumerate() {
            let t = TrainIdx(ti as u32);
            let w = *self
                .params
                .travel
                .get(&t)
                .ok_or_else(|| Error::MissingWindow {
                    kind: "travel",
                    key: format!("({})", train.id),
                })?;
            let w = self.checked_window(format!("travel ({})", train.id), &w)?;
            let first = *train.path.first().unwrap();
            let last = *train.path.last().unwrap();
            let terms = vec![(self.arrival(t, last)?, 1.0), (self.departure(t, first)?, -1.0)];
            self.push_window_rows(RowFamily::Travel, terms, w)?;
        }

        Ok(())
    }

    /// The ordering row of one pair: the partner's midpoint (times two) must
    /// stay on the pair's side of the reference midpoint.
    fn emit_order_row(&mut self, pair: &SyncPair) -> Result<()> {
        let (a_i, d_i) = (self.arrival(pair.t, pair.i)?, self.departure(pair.t, pair.i)?);
        let (a_j, d_j) = (
            self.arrival(pair.partner, pair.j)?,
            self.departure(pair.partner, pair.j)?,
        );
        let terms = match pair.direction {
            crate::pairing::Direction::Right => vec![
                (a_j, 1.0),
                (d_j, 1.0),
                (a_i, -1.0),
                (d_i, -1.0),
            ],
            crate::pairing::Direction::Left => vec![
                (a_i, 1.0),
                (d_i, 1.0),
                (a_j, -1.0),
                (d_j, -1.0),
            ],
        };
        self.push_row(RowFamily::Order, terms, Sense::Ge, 0.0)
    }

    /// The six indicator rows of one pair. With the indicator off they are
    /// slackened into redundancy by `m`; with it on they pin the overlap to
    /// the interval-intersection value and force the phases to actually meet.
    fn emit_indicator_rows(
        &mut self,
        pair: &SyncPair,
        pv: PairVars,
        m: f64,
        epsilon: f64,
        family: RowFamily,
    ) -> Result<()> {
        let (at, ap) = pair.accel();
        let (bt, bp) = pair.brake();
        let dep = self.departure(at, ap)?;
        let arr = self.arrival(bt, bp)?;
        let phase_sum = pair.accel_lb + pair.brake_lb;
        let (sigma, lambda) = (pv.sigma, pv.lambda);

        match family {
            // arr - dep + M*lambda <= phase_sum + M - epsilon
            RowFamily::GapMax => self.push_row(
                family,
                vec![(arr, 1.0), (dep, -1.0), (lambda, m)],
                Sense::Le,
                phase_sum + m - epsilon,
            ),
            // dep - arr + M*lambda <= M - epsilon
            RowFamily::GapMin => self.push_row(
                family,
                vec![(dep, 1.0), (arr, -1.0), (lambda, m)],
                Sense::Le,
                m - epsilon,
            ),
            // sigma - accel_lb*lambda <= 0
            RowFamily::CapAccel => self.push_row(
                family,
                vec![(sigma, 1.0), (lambda, -pair.accel_lb)],
                Sense::Le,
                0.0,
            ),
            // sigma - brake_lb*lambda <= 0
            RowFamily::CapBrake => self.push_row(
                family,
                vec![(sigma, 1.0), (lambda, -pair.brake_lb)],
                Sense::Le,
                0.0,
            ),
            // sigma - dep + arr + M*lambda <= phase_sum + M
            RowFamily::CapWindow => self.push_row(
                family,
                vec![(sigma, 1.0), (dep, -1.0), (arr, 1.0), (lambda, m)],
                Sense::Le,
                phase_sum + m,
            ),
            // sigma - arr + dep + M*lambda <= M
            RowFamily::CapGap => self.push_row(
                family,
                vec![(sigma, 1.0), (arr, -1.0), (dep, 1.0), (lambda, m)],
                Sense::Le,
                m,
            ),
            _ => unreachable!("not an indicator family"),
        }
    }
}

/// Assembles the full model: event variables boxed around the initial
/// timetable, operational rows, and per pair one ordering row plus six
/// indicator rows, an overlap variable and a binary indicator.
pub fn build_model(
    net: &RailNetwork,
    params: &ModelParams,
    pairs: &SyncPairs,
    tt0: &Timetable,
    mode: BigMMode,
) -> Result<MipModel> {
    let mut b = ModelBuilder {
        net,
        params,
        tt0,
        vars: Vec::new(),
        rows: Vec::new(),
        event_vars: BTreeMap::new(),
        namer: RowNamer::new(),
    };

    if params.epsilon <= 0.0 || params.epsilon >= 1.0 {
        return Err(Error::Invalid(format!(
            "epsilon must lie in (0, 1), got {}",
            params.epsilon
        )));
    }
    if let Some(dev) = params.deviation {
        if dev < 0.0 {
            return Err(Error::Invalid(format!(
                "deviation limit must be nonnegative, got {dev}"
            )));
        }
    }
    if let BigMMode::Fixed(m) = mode {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Invalid(format!(
                "fixed big-M must be positive and finite, got {m}"
            )));
        }
    }

    b.add_event_vars(mode)?;

    let all_pairs: Vec<SyncPair> = pairs.all().cloned().collect();

    // Overlap variables for all pairs, then the indicator block (kept
    // contiguous so integer columns form a single marker section).
    let mut pair_vars = Vec::with_capacity(all_pairs.len());
    for (k, _) in all_pairs.iter().enumerate() {
        let sigma = VarId(b.vars.len());
        b.vars.push(Variable {
            name: format!("S{k:07}"),
            kind: VarKind::Overlap(k),
            lo: 0.0,
            hi: f64::INFINITY,
            integer: false,
        });
        pair_vars.push(PairVars {
            sigma,
            lambda: VarId(0), // patched below
        });
    }
    for (k, pv) in pair_vars.iter_mut().enumerate() {
        pv.lambda = VarId(b.vars.len());
        b.vars.push(Variable {
            name: format!("Y{k:07}"),
            kind: VarKind::Indicator(k),
            lo: 0.0,
            hi: 1.0,
            integer: true,
        });
    }

    // Per-pair big-M.
    let mut big_m = Vec::with_capacity(all_pairs.len());
    for pair in &all_pairs {
        let m = match mode {
            BigMMode::Fixed(m) => m,
            BigMMode::Auto => {
                let (at, ap) = pair.accel();
                let (bt, bp) = pair.brake();
                let dep_var = &b.vars[b.departure(at, ap)?.0];
                let arr_var = &b.vars[b.arrival(bt, bp)?.0];
                compute_big_m(
                    (dep_var.lo, dep_var.hi),
                    (arr_var.lo, arr_var.hi),
                    pair.accel_lb + pair.brake_lb,
                    params.epsilon,
                )
                .ok_or_else(|| Error::UnboundedBigM {
                    pair: format!(
                        "({}, {}, {})",
                        net.platform_id(pair.i),
                        net.platform_id(pair.j),
                        net.train_id(pair.t)
                    ),
                })?
            }
        };
        big_m.push(m);
    }

    b.emit_operational()?;
    for pair in &all_pairs {
        b.emit_order_row(pair)?;
    }
    for family in [
        RowFamily::GapMax,
        RowFamily::GapMin,
        RowFamily::CapAccel,
        RowFamily::CapBrake,
        RowFamily::CapWindow,
        RowFamily::CapGap,
    ] {
        for (k, pair) in all_pairs.iter().enumerate() {
            b.emit_indicator_rows(pair, pair_vars[k], big_m[k], params.epsilon, family)?;
        }
    }

    let objective = pair_vars.iter().map(|pv| (pv.sigma, 1.0)).collect();

    Ok(MipModel {
        vars: b.vars,
        rows: b.rows,
        objective,
        pairs: all_pairs,
        pair_vars,
        event_vars: b.event_vars,
        big_m,
        epsilon: params.epsilon,
        big_m_mode: mode,
    })
}
