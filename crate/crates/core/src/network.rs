//! Static rail network: stations, platforms, directed tracks, crossing-overs,
//! trains, and the coupling sets (connections, turn-arounds, headways) that tie
//! train pairs together, plus the numeric parameters of the optimization model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Times and durations are seconds, as real numbers.
pub type Seconds = f64;

macro_rules! idx_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

idx_type!(
    /// Index into [`RailNetwork::stations`].
    StationIdx
);
idx_type!(
    /// Index into [`RailNetwork::lines`].
    LineIdx
);
idx_type!(
    /// Index into [`RailNetwork::platforms`].
    PlatformIdx
);
idx_type!(
    /// Index into [`RailNetwork::trains`].
    TrainIdx
);

#[derive(Debug, Clone)]
pub struct Station {
    pub id: String,
}

#[derive(Debug, Clone)]
pub struct Line {
    pub id: String,
}

/// A stopping position at a station, belonging to exactly one line.
#[derive(Debug, Clone)]
pub struct Platform {
    pub id: String,
    pub station: StationIdx,
    pub line: LineIdx,
}

/// Directed running track between two platforms on the same line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Track {
    pub from: PlatformIdx,
    pub to: PlatformIdx,
}

/// Directed link that lets a train leave the terminal of one line and re-enter
/// service at a platform of another line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingOver {
    pub from: PlatformIdx,
    pub to: PlatformIdx,
}

/// A scheduled service: one directed run over a sequence of platforms.
///
/// A physical vehicle that turns around at a terminal re-enters as a *different*
/// train; the two are linked through a turn-around coupling.
#[derive(Debug, Clone)]
pub struct Train {
    pub id: String,
    pub path: Vec<PlatformIdx>,
}

impl Train {
    /// Position of `p` in the path, if the train calls there.
    pub fn position_of(&self, p: PlatformIdx) -> Option<usize> {
        self.path.iter().position(|&q| q == p)
    }

    pub fn visits(&self, p: PlatformIdx) -> bool {
        self.position_of(p).is_some()
    }

    /// Consecutive platform pairs traversed by this train.
    pub fn edges(&self) -> impl Iterator<Item = (PlatformIdx, PlatformIdx)> + '_ {
        self.path.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Two trains coupled across a platform pair: a passenger connection, a
/// turn-around of the same physical vehicle, or a headway pair on a track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Coupling {
    pub i: PlatformIdx,
    pub j: PlatformIdx,
    /// Earlier train of the pair.
    pub t: TrainIdx,
    /// Later train of the pair.
    pub t_next: TrainIdx,
}

#[derive(Debug, Clone)]
pub struct RailNetwork {
    pub stations: Vec<Station>,
    pub lines: Vec<Line>,
    pub platforms: Vec<Platform>,
    pub tracks: Vec<Track>,
    pub crossing_overs: Vec<CrossingOver>,
    pub trains: Vec<Train>,
    /// Platform pairs eligible for synchronization; each should couple the two
    /// opposite platforms of one station.
    pub opposite_pairs: Vec<(PlatformIdx, PlatformIdx)>,
    pub connections: Vec<Coupling>,
    pub turnarounds: Vec<Coupling>,
    pub headways: Vec<Coupling>,
}

impl RailNetwork {
    pub fn platform_id(&self, p: PlatformIdx) -> &str {
        &self.platforms[p.index()].id
    }

    pub fn train_id(&self, t: TrainIdx) -> &str {
        &self.trains[t.index()].id
    }

    pub fn has_track(&self, from: PlatformIdx, to: PlatformIdx) -> bool {
        self.tracks.iter().any(|tk| tk.from == from && tk.to == to)
    }

    /// Trains calling at platform `p` (arrive, dwell, depart), in index order.
    pub fn trains_at(&self, p: PlatformIdx) -> Vec<TrainIdx> {
        (0..self.trains.len() as u32)
            .map(TrainIdx)
            .filter(|&t| self.trains[t.index()].visits(p))
            .collect()
    }
}

/// Inclusive two-sided window `[lo, hi]` in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: Seconds,
    pub hi: Seconds,
}

impl Window {
    pub fn new(lo: Seconds, hi: Seconds) -> Self {
        Window { lo, hi }
    }

    pub fn contains(&self, v: Seconds, tol: f64) -> bool {
        v >= self.lo - tol && v <= self.hi + tol
    }
}

/// Minimum departure separations for a headway coupling on track `(i, j)`:
/// one floor per endpoint platform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadwayGap {
    pub at_from: Seconds,
    pub at_to: Seconds,
}

/// Numeric parameters of the model: pairing radius, strictness margin, event
/// deviation limit, and all scheduling windows keyed by the entities they bind.
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// Pairing radius: largest midpoint distance at which two trains are
    /// considered synchronizable.
    pub r: Seconds,
    /// Margin used to turn strict inequalities into closed ones.
    pub epsilon: Seconds,
    /// Half-width of the box each event time may move within, centered on the
    /// initial timetable. `None` leaves event domains unbounded above.
    pub deviation: Option<Seconds>,
    /// Running-time window per (train, track).
    pub trip: BTreeMap<(TrainIdx, PlatformIdx, PlatformIdx), Window>,
    /// Dwell window per (train, platform).
    pub dwell: BTreeMap<(TrainIdx, PlatformIdx), Window>,
    /// Total travel-time window per train (first departure to last arrival).
    pub travel: BTreeMap<TrainIdx, Window>,
    /// Transfer window per connection coupling.
    pub connection: BTreeMap<Coupling, Window>,
    /// Re-entry window per turn-around coupling.
    pub turnaround: BTreeMap<Coupling, Window>,
    /// Departure separation floors per headway coupling.
    pub headway: BTreeMap<Coupling, HeadwayGap>,
    /// Acceleration-phase duration bounds per (train, platform); the phase
    /// starts at departure.
    pub accel: BTreeMap<(TrainIdx, PlatformIdx), Window>,
    /// Braking-phase duration bounds per (train, platform); the phase ends at
    /// arrival.
    pub brake: BTreeMap<(TrainIdx, PlatformIdx), Window>,
}

pub const DEFAULT_PAIRING_RADIUS: Seconds = 300.0;
pub const DEFAULT_EPSILON: Seconds = 0.005;
pub const DEFAULT_DEVIATION: Seconds = 300.0;

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            r: DEFAULT_PAIRING_RADIUS,
            epsilon: DEFAULT_EPSILON,
            deviation: Some(DEFAULT_DEVIATION),
            trip: BTreeMap::new(),
            dwell: BTreeMap::new(),
            travel: BTreeMap::new(),
            connection: BTreeMap::new(),
            turnaround: BTreeMap::new(),
            headway: BTreeMap::new(),
            accel: BTreeMap::new(),
            brake: BTreeMap::new(),
        }
    }
}

/// A structural defect found by [`validate_network`]. Fields carry resolved
/// ids so issues render without the network at hand.
#[derive(Debug, Clone, PartialEq)]
pub enum StructuralIssue {
    DuplicateStationId(String),
    DuplicateLineId(String),
    DuplicatePlatformId(String),
    DuplicateTrainId(String),
    /// Track endpoints are the same platform.
    TrackSelfLoop { track: String },
    /// Track endpoints sit at the same station (opposite platforms).
    TrackJoinsOppositePlatforms { track: String },
    DuplicateTrack { track: String },
    /// Crossing-over endpoints are on the same line.
    CrossingOverSameLine { link: String },
    /// Train path has fewer than two platforms.
    PathTooShort { train: String },
    /// Consecutive path platforms are not joined by a track.
    PathEdgeNotTrack { train: String, from: String, to: String },
    /// Train path visits the same platform twice.
    PathRepeatsPlatform { train: String, platform: String },
    /// Synchronization pair is not a pair of opposite platforms.
    PairNotOpposite { i: String, j: String },
    /// A coupling names a train that never calls at the named platform.
    CouplingMissesPlatform {
        kind: &'static str,
        train: String,
        platform: String,
    },
    /// A headway coupling's trains do not traverse the named track.
    HeadwayOffTrack { train: String, track: String },
    /// A parameter window has lo > hi.
    ReversedWindow { what: String, lo: f64, hi: f64 },
    /// A duration bound is negative.
    NegativeDuration { what: String, value: f64 },
    NonPositiveRadius { r: f64 },
    EpsilonOutOfRange { epsilon: f64 },
}

impl fmt::Display for StructuralIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use StructuralIssue::*;
        match self {
            DuplicateStationId(id) => write!(f, "duplicate station id `{id}`"),
            DuplicateLineId(id) => write!(f, "duplicate line id `{id}`"),
            DuplicatePlatformId(id) => write!(f, "duplicate platform id `{id}`"),
            DuplicateTrainId(id) => write!(f, "duplicate train id `{id}`"),
            TrackSelfLoop { track } => write!(f, "track {track} is a self-loop"),
            TrackJoinsOppositePlatforms { track } => {
                write!(f, "track {track} joins opposite platforms of one station")
            }
            DuplicateTrack { track } => write!(f, "duplicate track {track}"),
            CrossingOverSameLine { link } => {
                write!(f, "crossing-over {link} stays on one line")
            }
            PathTooShort { train } => {
                write!(f, "train `{train}` path has fewer than two platforms")
            }
            PathEdgeNotTrack { train, from, to } => {
                write!(f, "train `{train}` step {from}->{to} is not a track")
            }
            PathRepeatsPlatform { train, platform } => {
                write!(f, "train `{train}` visits platform `{platform}` twice")
            }
            PairNotOpposite { i, j } => {
                write!(f, "sync pair ({i}, {j}) is not a pair of opposite platforms")
            }
            CouplingMissesPlatform {
                kind,
                train,
                platform,
            } => write!(
                f,
                "{kind} coupling names train `{train}` which never calls at `{platform}`"
            ),
            HeadwayOffTrack { train, track } => {
                write!(f, "headway train `{train}` does not traverse track {track}")
            }
            ReversedWindow { what, lo, hi } => {
                write!(f, "window for {what} is reversed: [{lo}, {hi}]")
            }
            NegativeDuration { what, value } => {
                write!(f, "duration bound for {what} is negative: {value}")
            }
            NonPositiveRadius { r } => write!(f, "pairing radius must be positive, got {r}"),
            EpsilonOutOfRange { epsilon } => {
                write!(f, "epsilon must lie in (0, 1), got {epsilon}")
            }
        }
    }
}

fn track_label(net: &RailNetwork, from: PlatformIdx, to: PlatformIdx) -> String {
    format!("{}->{}", net.platform_id(from), net.platform_id(to))
}

/// Checks every structural invariant of the network graph. Returns all
/// defects found; an empty list means the network is well-formed.
pub fn validate_network(net: &RailNetwork) -> Vec<StructuralIssue> {
    use StructuralIssue::*;
    let mut issues = Vec::new();

    let mut seen = BTreeSet::new();
    for s in &net.stations {
        if !seen.insert(&s.id) {
            issues.push(DuplicateStationId(s.id.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    for l in &net.lines {
        if !seen.insert(&l.id) {
            issues.push(DuplicateLineId(l.id.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    for p in &net.platforms {
        if !seen.insert(&p.id) {
            issues.push(DuplicatePlatformId(p.id.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    for t in &net.trains {
        if !seen.insert(&t.id) {
            issues.push(DuplicateTrainId(t.id.clone()));
        }
    }

    let mut seen_tracks = BTreeSet::new();
    for tk in &net.tracks {
        let label = track_label(net, tk.from, tk.to);
        if tk.from == tk.to {
            issues.push(TrackSelfLoop { track: label });
            continue;
        }
        let (pf, pt) = (&net.platforms[tk.from.index()], &net.platforms[tk.to.index()]);
        if pf.station == pt.station {
            issues.push(TrackJoinsOppositePlatforms { track: label.clone() });
        }
        if !seen_tracks.insert((tk.from, tk.to)) {
            issues.push(DuplicateTrack { track: label });
        }
    }

    for co in &net.crossing_overs {
        let (pf, pt) = (&net.platforms[co.from.index()], &net.platforms[co.to.index()]);
        if pf.line == pt.line {
            issues.push(CrossingOverSameLine {
                link: track_label(net, co.from, co.to),
            });
        }
    }

    for tr in &net.trains {
        if tr.path.len() < 2 {
            issues.push(PathTooShort {
                train: tr.id.clone(),
            });
        }
        let mut visited = BTreeSet::new();
        for &p in &tr.path {
            if !visited.insert(p) {
                issues.push(PathRepeatsPlatform {
                    train: tr.id.clone(),
                    platform: net.platform_id(p).to_string(),
                });
            }
        }
        for (from, to) in tr.edges() {
            if !net.has_track(from, to) {
                issues.push(PathEdgeNotTrack {
                    train: tr.id.clone(),
                    from: net.platform_id(from).to_string(),
                    to: net.platform_id(to).to_string(),
                });
            }
        }
    }

    for &(i, j) in &net.opposite_pairs {
        let (pi, pj) = (&net.platforms[i.index()], &net.platforms[j.index()]);
        if i == j || pi.station != pj.station || pi.line == pj.line {
            issues.push(PairNotOpposite {
                i: pi.id.clone(),
                j: pj.id.clone(),
            });
        }
    }

    let coupling_sets: [(&'static str, &Vec<Coupling>); 2] =
        [("connection", &net.connections), ("turn-around", &net.turnarounds)];
    for (kind, set) in coupling_sets {
        for c in set.iter() {
            if !net.trains[c.t.index()].visits(c.i) {
                issues.push(CouplingMissesPlatform {
                    kind,
                    train: net.train_id(c.t).to_string(),
                    platform: net.platform_id(c.i).to_string(),
                });
            }
            if !net.trains[c.t_next.index()].visits(c.j) {
                issues.push(CouplingMissesPlatform {
                    kind,
                    train: net.train_id(c.t_next).to_string(),
                    platform: net.platform_id(c.j).to_string(),
                });
            }
        }
    }

    for c in &net.headways {
        for t in [c.t, c.t_next] {
            let traverses = net.trains[t.index()]
                .edges()
                .any(|(from, to)| from == c.i && to == c.j);
            if !traverses {
                issues.push(HeadwayOffTrack {
                    train: net.train_id(t).to_string(),
                    track: track_label(net, c.i, c.j),
                });
            }
        }
    }

    issues
}

/// Checks the numeric invariants of the parameters against a network: windows
/// ordered, durations nonnegative, radius and epsilon in range.
pub fn validate_params(net: &RailNetwork, params: &ModelParams) -> Vec<StructuralIssue> {
    use StructuralIssue::*;
    let mut issues = Vec::new();

    if params.r <= 0.0 {
        issues.push(NonPositiveRadius { r: params.r });
    }
    if !(params.epsilon > 0.0 && params.epsilon < 1.0) {
        issues.push(EpsilonOutOfRange {
            epsilon: params.epsilon,
        });
    }
    if let Some(dev) = params.deviation {
        if dev < 0.0 {
            issues.push(NegativeDuration {
                what: "deviation limit".to_string(),
                value: dev,
            });
        }
    }

    fn check_window(
        issues: &mut Vec<StructuralIssue>,
        what: String,
        w: &Window,
        must_be_nonneg: bool,
    ) {
        if w.lo > w.hi {
            issues.push(ReversedWindow {
                what: what.clone(),
                lo: w.lo,
                hi: w.hi,
            });
        }
        if must_be_nonneg && w.lo < 0.0 {
            issues.push(NegativeDuration { what, value: w.lo });
        }
    }

    for (&(t, from, to), w) in &params.trip {
        let what = format!(
            "trip ({}, {})",
            net.train_id(t),
            track_label(net, from, to)
        );
        check_window(&mut issues, what, w, true);
    }
    for (&(t, p), w) in &params.dwell {
        check_window(
            &mut issues,
            format!("dwell ({}, {})", net.train_id(t), net.platform_id(p)),
            w,
            true,
        );
    }
    for (&t, w) in &params.travel {
        check_window(&mut issues, format!("travel ({})", net.train_id(t)), w, true);
    }
    for (c, w) in &params.connection {
        let what = format!(
            "connection ({}, {})",
            net.train_id(c.t),
            net.train_id(c.t_next)
        );
        check_window(&mut issues, what, w, false);
    }
    for (c, w) in &params.turnaround {
        let what = format!(
            "turn-around ({}, {})",
            net.train_id(c.t),
            net.train_id(c.t_next)
        );
        check_window(&mut issues, what, w, false);
    }
    for (c, g) in &params.headway {
        for (side, v) in [("from", g.at_from), ("to", g.at_to)] {
            if v < 0.0 {
                issues.push(NegativeDuration {
                    what: format!(
                        "headway ({}, {}) at {side} platform",
                        net.train_id(c.t),
                        net.train_id(c.t_next)
                    ),
                    value: v,
                });
            }
        }
    }
    for (&(t, p), w) in &params.accel {
        check_window(
            &mut issues,
            format!(
                "acceleration phase ({}, {})",
                net.train_id(t),
                net.platform_id(p)
            ),
            w,
            true,
        );
    }
    for (&(t, p), w) in &params.brake {
        check_window(
            &mut issues,
            format!(
                "braking phase ({}, {})",
                net.train_id(t),
                net.platform_id(p)
            ),
            w,
            true,
        );
    }

    issues
}
