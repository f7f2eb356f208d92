//! Synthetic instance generation.
//!
//! Emits a two-line corridor — every station has one platform per direction —
//! served by two fleets dispatched on a shared spacing grid, one per line.
//! Running times are not sampled freely: per-junction trips are solved so
//! that the dwell-midpoint gap between opposing trains drifts by a controlled
//! amount per station. Every [`PIN_PERIOD`]-th station the gap returns to a
//! small pinned value inside the pairing radius while all other stations stay
//! outside it. The result is an instance whose synchronization pairs sit at
//! designated stations with a known positive initial overlap, every pair can
//! be improved independently, and all separation constraints hold by
//! construction rather than by sampling luck.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{
    CallDoc, CouplingDoc, EdgeDoc, EventDoc, HeadwayDoc, InstanceDoc, OppositeDoc, ParamsDoc,
    PlatformDoc, TrainDoc, TravelDoc, TripDoc,
};
use crate::network::DEFAULT_EPSILON;

/// First dispatch leaves around this many seconds into the horizon.
const DISPATCH_BASE: f64 = 600.0;
/// Realized stop length at every platform; dwell windows are centered here.
const DWELL_NOM: f64 = 24.0;
/// Brake arrival trails the paired accelerating departure by this much at a
/// pinned station (before per-train dispatch jitter).
const PIN_GAP: f64 = 8.0;
/// The same pin expressed as a dwell-midpoint gap: midpoints sit half a
/// dwell before the departure and half a dwell after the arrival.
const PIN_MID: f64 = PIN_GAP + DWELL_NOM;
/// Pinned stations recur with this period along the corridor.
const PIN_PERIOD: usize = 4;
/// Off-pin stations keep at least this margin outside the radius, beyond the
/// dispatch-jitter span.
const ZONE_MARGIN: f64 = 2.0;
/// Per-train dispatch jitter is an integer drawn from ±this bound.
const DISPATCH_JITTER: i64 = 2;
/// Junction running times the drift solver may choose from.
const TRIP_MIN: f64 = 125.0;
const TRIP_MAX: f64 = 185.0;
/// Lower edge of every emitted turn-around window.
const TURNAROUND_LO: f64 = 120.0;
/// Realized turn-arounds keep this margin inside the emitted window.
const TURNAROUND_MARGIN: f64 = 10.0;
/// Half-width of connection windows around their realized transfer gap.
const CONNECTION_HALF_WIDTH: f64 = 90.0;
/// Largest realized transfer gap that still produces a connection.
const CONNECTION_REACH: f64 = 600.0;
/// Headway floors take this fraction of the realized separation…
const HEADWAY_FACTOR: f64 = 0.8;
/// …but never less than this.
const HEADWAY_MIN: f64 = 30.0;
/// Acceleration-phase floor range; width added for the ceiling.
const ACCEL_LB_LO: i64 = 14;
const ACCEL_LB_HI: i64 = 18;
const PHASE_WIDTH: f64 = 6.0;
/// Braking-phase floor range.
const BRAKE_LB_LO: i64 = 16;
const BRAKE_LB_HI: i64 = 20;

/// Scale and shape knobs for [`generate`]. All times in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    /// Stations along the corridor (platforms per line). One in every
    /// [`PIN_PERIOD`] carries synchronization pairs.
    pub stations: usize,
    /// Functional trains; must be even — the two directions get equal fleets.
    pub trains: usize,
    /// Dispatch spacing within each fleet.
    pub mean_headway_s: f64,
    /// Full width of every trip window.
    pub trip_window_s: f64,
    /// Full width of every dwell window.
    pub dwell_window_s: f64,
    /// Pairing radius.
    pub r: f64,
    /// Event deviation box half-width.
    pub deviation: f64,
    /// Scheduling horizon; generation fails if the plan overruns it.
    pub horizon_s: f64,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            stations: 9,
            trains: 32,
            mean_headway_s: 120.0,
            trip_window_s: 40.0,
            dwell_window_s: 20.0,
            r: 36.0,
            deviation: 300.0,
            horizon_s: 21_600.0,
            seed: 1,
        }
    }
}

impl GenSpec {
    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::GenSpec(msg));
        if self.stations < 3 {
            return fail(format!(
                "need at least 3 stations for terminals and a transfer point, got {}",
                self.stations
            ));
        }
        if self.trains < 2 || self.trains % 2 != 0 {
            return fail(format!(
                "train count must be even and at least 2 (one fleet per direction), got {}",
                self.trains
            ));
        }
        if !(self.mean_headway_s >= 90.0 && self.mean_headway_s <= 430.0) {
            return fail(format!(
                "dispatch spacing must lie in [90, 430] s, got {}",
                self.mean_headway_s
            ));
        }
        if !(self.trip_window_s > 0.0 && self.trip_window_s <= 120.0) {
            return fail(format!(
                "trip window width must lie in (0, 120], got {}",
                self.trip_window_s
            ));
        }
        if !(self.dwell_window_s > 0.0 && self.dwell_window_s < 2.0 * (DWELL_NOM - 10.0)) {
            return fail(format!(
                "dwell window width must lie in (0, {}), got {}",
                2.0 * (DWELL_NOM - 10.0),
                self.dwell_window_s
            ));
        }
        let r_min = PIN_MID + DISPATCH_JITTER as f64 * 2.0;
        if !(self.r >= r_min) {
            return fail(format!(
                "pairing radius must cover the pinned midpoint gap plus jitter (at least {}), got {}",
                r_min, self.r
            ));
        }
        if !(self.r + ZONE_MARGIN < self.mean_headway_s / 2.0) {
            return fail(format!(
                "pairing radius {} leaves no off-pin zone under a {} s spacing",
                self.r, self.mean_headway_s
            ));
        }
        if !(self.deviation >= 0.0) {
            return fail(format!(
                "deviation must be non-negative, got {}",
                self.deviation
            ));
        }
        if !(self.horizon_s > 0.0) {
            return fail(format!("horizon must be positive, got {}", self.horizon_s));
        }
        Ok(())
    }
}

/// One functional train's realized schedule: platform indices with their
/// arrival/departure times, in path order.
struct Run {
    id: String,
    path: Vec<usize>,
    /// (arrival, departure) aligned with `path`.
    events: Vec<(f64, f64)>,
    /// Index into `lines`: which line this run traverses.
    line: usize,
}

/// Simulates one run along `path` given its first departure, using the
/// shared per-leg trips and per-platform dwells.
fn simulate(
    path: &[usize],
    first_departure: f64,
    trip: &BTreeMap<(usize, usize), f64>,
    dwell: &[f64],
) -> Vec<(f64, f64)> {
    let mut events = Vec::with_capacity(path.len());
    let mut dep = first_departure;
    events.push((first_departure - dwell[path[0]], first_departure));
    for w in path.windows(2) {
        let arr = dep + trip[&(w[0], w[1])];
        dep = arr + dwell[w[1]];
        events.push((arr, dep));
    }
    events
}

/// Distance from `x` to the nearest multiple of `period`.
fn grid_distance(x: f64, period: f64) -> f64 {
    let phase = x.rem_euclid(period);
    phase.min(period - phase)
}

/// Solves for the per-junction running-time cycle. Junction trips repeat with
/// period [`PIN_PERIOD`]; between consecutive stations the opposing-train
/// midpoint gap drifts by exactly `-(2·trip + 2·DWELL_NOM) mod headway`. The
/// cycle makes that drift `+d` on the first three junctions and `-3d` on the
/// fourth, so the gap returns to [`PIN_MID`] every [`PIN_PERIOD`]-th station
/// while the intermediate stations stay at least `r + ZONE_MARGIN + jitter`
/// away from every grid point.
fn solve_trip_cycle(headway: f64, r: f64) -> Result<[f64; PIN_PERIOD]> {
    let v_lo = 2.0 * TRIP_MIN + 2.0 * DWELL_NOM;
    let v_hi = 2.0 * TRIP_MAX + 2.0 * DWELL_NOM;
    // Smallest representative of `residue (mod headway)` inside [v_lo, v_hi].
    let representative = |residue: f64| -> Option<f64> {
        let base = residue.rem_euclid(headway);
        let v = base + ((v_lo - base) / headway).ceil() * headway;
        (v <= v_hi).then_some(v)
    };
    let clearance = r + ZONE_MARGIN + 2.0 * DISPATCH_JITTER as f64;
    let mut best: Option<(f64, f64, f64)> = None; // (score, v_step, v_close)
    for d in 1..=90i64 {
        let d = d as f64;
        let score = (1..PIN_PERIOD)
            .map(|k| grid_distance(PIN_MID + k as f64 * d, headway))
            .fold(f64::INFINITY, f64::min);
        if score < clearance {
            continue;
        }
        let Some(v_step) = representative(-d) else {
            continue;
        };
        let Some(v_close) = representative((PIN_PERIOD as f64 - 1.0) * d) else {
            continue;
        };
        if best.map_or(true, |(s, _, _)| score > s) {
            best = Some((score, v_step, v_close));
        }
    }
    let Some((_, v_step, v_close)) = best else {
        return Err(Error::GenSpec(format!(
            "no running-time cycle keeps off-pin stations outside radius {r} under a \
             {headway} s spacing"
        )));
    };
    let trip = |v: f64| (v - 2.0 * DWELL_NOM) / 2.0;
    let mut cycle = [trip(v_step); PIN_PERIOD];
    cycle[PIN_PERIOD - 1] = trip(v_close);
    Ok(cycle)
}

/// Generates a deterministic, feasible instance document per `spec`.
///
/// Layout: stations S01…S{n} each carry platform A (outbound line, S01→S{n})
/// and platform B (return line, S{n}→S01), with crossing-overs joining the
/// two lines at both terminals. Each line is served by its own fleet on a
/// fixed dispatch grid; the return grid's phase is chosen so that at every
/// pinned station an arriving braking train trails a departing accelerating
/// one by a few seconds — the initial timetable already synchronizes there.
/// Turn-arounds couple each train to the opposing-fleet service whose
/// realized dispatch falls inside the turn-around window at its terminal.
pub fn generate(spec: &GenSpec) -> Result<InstanceDoc> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let n = spec.stations;
    let headway = spec.mean_headway_s;
    let station_name = |s: usize| format!("S{:02}", s + 1);
    // Platform index convention: station s has platform A at 2s, B at 2s+1.
    let platform_name = |p: usize| {
        format!(
            "{}{}",
            station_name(p / 2),
            if p % 2 == 0 { "A" } else { "B" }
        )
    };
    let path_a: Vec<usize> = (0..n).map(|s| 2 * s).collect();
    let path_b: Vec<usize> = (0..n).rev().map(|s| 2 * s + 1).collect();
    let paths = [path_a, path_b];

    // Shared realizations: the solved cycle trip per junction (same in both
    // directions), one fixed dwell per platform.
    let cycle = solve_trip_cycle(headway, spec.r)?;
    let mut trip_real: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for path in &paths {
        for w in path.windows(2) {
            let junction = w[0].min(w[1]) / 2;
            trip_real.insert((w[0], w[1]), cycle[junction % PIN_PERIOD]);
        }
    }
    let dwell_real = vec![DWELL_NOM; 2 * n];

    // Return-fleet phase: the k-th trains of the two fleets meet exactly at
    // the pinned station nearest the corridor middle with midpoint gap
    // PIN_MID, so even two-train instances pair there. Other pinned stations
    // pair the interior of the fleets (the partner index shifts by the
    // cumulative travel difference over the dispatch spacing).
    let pin_anchor = {
        let nearest = (n / 2 + PIN_PERIOD / 2) / PIN_PERIOD * PIN_PERIOD;
        nearest.min((n - 1) / PIN_PERIOD * PIN_PERIOD)
    };
    let probe_a = simulate(&paths[0], DISPATCH_BASE, &trip_real, &dwell_real);
    let probe_b = simulate(&paths[1], DISPATCH_BASE, &trip_real, &dwell_real);
    let mid_of = |ev: (f64, f64)| 0.5 * (ev.0 + ev.1);
    let pos_a = paths[0].iter().position(|&p| p == 2 * pin_anchor).unwrap();
    let pos_b = paths[1]
        .iter()
        .position(|&p| p == 2 * pin_anchor + 1)
        .unwrap();
    let fleet_shift = mid_of(probe_a[pos_a]) + PIN_MID - mid_of(probe_b[pos_b]);

    // Dispatch both fleets: per-train integer jitter keeps every invariant
    // (pins, zones, headways) inside its designed margins while varying the
    // realized gaps seed to seed.
    let fleet_size = spec.trains / 2;
    let id_width = if spec.trains >= 1000 { 4 } else { 3 };
    let train_id = |k: usize| format!("T{:0width$}", k + 1, width = id_width);
    let mut runs: Vec<Run> = Vec::with_capacity(spec.trains);
    for k in 0..fleet_size {
        for line in [0usize, 1] {
            let base = if line == 0 { 0.0 } else { fleet_shift };
            let jitter = rng.gen_range(-DISPATCH_JITTER..=DISPATCH_JITTER) as f64;
            let first_dep = DISPATCH_BASE + base + k as f64 * headway + jitter;
            runs.push(Run {
                id: train_id(2 * k + line),
                path: paths[line].clone(),
                events: simulate(&paths[line], first_dep, &trip_real, &dwell_real),
                line,
            });
        }
    }

    // Horizon check before any document is assembled.
    let latest = runs
        .iter()
        .flat_map(|r| r.events.iter().map(|e| e.1))
        .fold(f64::NEG_INFINITY, f64::max);
    if latest > spec.horizon_s {
        return Err(Error::GenSpec(format!(
            "plan overruns the horizon: last departure at {latest:.0} s, horizon {:.0} s \
             (reduce trains, shrink the headway, or extend the horizon)",
            spec.horizon_s
        )));
    }

    // Turn-arounds: each train couples to the opposing service whose realized
    // first arrival falls inside the margin-narrowed window at its terminal.
    // The window spans one full dispatch period, so exactly one candidate
    // qualifies whenever the opposing fleet is still dispatching then.
    let turnaround_hi = TURNAROUND_LO + headway + 2.0 * TURNAROUND_MARGIN;
    let mut turnaround_docs = Vec::new();
    for run in &runs {
        let done = run.events.last().unwrap().1;
        let next_line = 1 - run.line;
        let lo = done + TURNAROUND_LO + TURNAROUND_MARGIN;
        let hi = done + turnaround_hi - TURNAROUND_MARGIN;
        let successor = runs
            .iter()
            .filter(|other| other.line == next_line)
            .find(|other| {
                let first_arr = other.events[0].0;
                first_arr >= lo && first_arr <= hi
            });
        if let Some(next) = successor {
            turnaround_docs.push(CouplingDoc {
                i: platform_name(*run.path.last().unwrap()),
                j: platform_name(next.path[0]),
                t: run.id.clone(),
                t_prime: next.id.clone(),
                lo: TURNAROUND_LO,
                hi: turnaround_hi,
            });
        }
    }

    // Per-train phase-duration draws, in train order for determinism.
    let mut accel_docs = Vec::new();
    let mut brake_docs = Vec::new();
    for run in &runs {
        for &p in &run.path {
            let alb = rng.gen_range(ACCEL_LB_LO..=ACCEL_LB_HI) as f64;
            let blb = rng.gen_range(BRAKE_LB_LO..=BRAKE_LB_HI) as f64;
            accel_docs.push(CallDoc {
                train: run.id.clone(),
                platform: platform_name(p),
                lo: alb,
                hi: alb + PHASE_WIDTH,
            });
            brake_docs.push(CallDoc {
                train: run.id.clone(),
                platform: platform_name(p),
                lo: blb,
                hi: blb + PHASE_WIDTH,
            });
        }
    }

    // Scheduling windows around the shared realizations.
    let half_trip = spec.trip_window_s / 2.0;
    let half_dwell = spec.dwell_window_s / 2.0;
    let mut trip_docs = Vec::new();
    let mut dwell_docs = Vec::new();
    let mut travel_docs = Vec::new();
    for run in &runs {
        let mut travel_lo = 0.0;
        let mut travel_hi = 0.0;
        for w in run.path.windows(2) {
            let nominal = trip_real[&(w[0], w[1])];
            trip_docs.push(TripDoc {
                train: run.id.clone(),
                from: platform_name(w[0]),
                to: platform_name(w[1]),
                lo: nominal - half_trip,
                hi: nominal + half_trip,
            });
            travel_lo += nominal - half_trip;
            travel_hi += nominal + half_trip;
        }
        for &p in &run.path {
            dwell_docs.push(CallDoc {
                train: run.id.clone(),
                platform: platform_name(p),
                lo: DWELL_NOM - half_dwell,
                hi: DWELL_NOM + half_dwell,
            });
        }
        // Total travel spans first departure to last arrival: every leg plus
        // every intermediate dwell.
        let intermediates = (run.path.len() - 2) as f64;
        travel_docs.push(TravelDoc {
            train: run.id.clone(),
            lo: travel_lo + intermediates * (DWELL_NOM - half_dwell),
            hi: travel_hi + intermediates * (DWELL_NOM + half_dwell),
        });
    }

    // Headways: per track, consecutive trains in departure order, floors at a
    // fixed fraction of the realized separations.
    let mut headway_docs = Vec::new();
    {
        let mut by_track: BTreeMap<(usize, usize), Vec<(f64, f64, usize)>> = BTreeMap::new();
        for (ri, run) in runs.iter().enumerate() {
            for (pos, w) in run.path.windows(2).enumerate() {
                let dep_from = run.events[pos].1;
                let dep_to = run.events[pos + 1].1;
                by_track
                    .entry((w[0], w[1]))
                    .or_default()
                    .push((dep_from, dep_to, ri));
            }
        }
        for ((from, to), mut users) in by_track {
            users.sort_by(|a, b| a.0.total_cmp(&b.0));
            for pair in users.windows(2) {
                let (d0_from, d0_to, r0) = pair[0];
                let (d1_from, d1_to, r1) = pair[1];
                headway_docs.push(HeadwayDoc {
                    i: platform_name(from),
                    j: platform_name(to),
                    t: runs[r0].id.clone(),
                    t_prime: runs[r1].id.clone(),
                    h_i: f64::max(HEADWAY_MIN, HEADWAY_FACTOR * (d1_from - d0_from)),
                    h_j: f64::max(HEADWAY_MIN, HEADWAY_FACTOR * (d1_to - d0_to)),
                });
            }
        }
    }

    // Connections: at the middle station, every arriving train is paired
    // with the opposite platform's nearest departure within reach.
    let mid = n / 2;
    let mut connection_docs = Vec::new();
    {
        let mid_a = 2 * mid;
        let mid_b = 2 * mid + 1;
        for run in &runs {
            let Some(pos) = run.path.iter().position(|&p| p == mid_a) else {
                continue;
            };
            let arr = run.events[pos].0;
            let mut best: Option<(f64, &Run)> = None;
            for other in &runs {
                if other.line == run.line {
                    continue;
                }
                let Some(opos) = other.path.iter().position(|&p| p == mid_b) else {
                    continue;
                };
                let gap = other.events[opos].1 - arr;
                if best.map_or(true, |(g, _)| gap.abs() < g.abs()) {
                    best = Some((gap, other));
                }
            }
            if let Some((gap, partner)) = best {
                if gap.abs() <= CONNECTION_REACH {
                    connection_docs.push(CouplingDoc {
                        i: platform_name(mid_a),
                        j: platform_name(mid_b),
                        t: run.id.clone(),
                        t_prime: partner.id.clone(),
                        lo: gap - CONNECTION_HALF_WIDTH,
                        hi: gap + CONNECTION_HALF_WIDTH,
                    });
                }
            }
        }
    }

    // Assemble the document in canonical order.
    let stations: Vec<String> = (0..n).map(station_name).collect();
    let mut platforms = Vec::with_capacity(2 * n);
    for s in 0..n {
        for line in ["A", "B"] {
            platforms.push(PlatformDoc {
                id: format!("{}{}", station_name(s), line),
                station: station_name(s),
                line: line.to_string(),
            });
        }
    }
    let mut tracks = Vec::new();
    for path in &paths {
        for w in path.windows(2) {
            tracks.push(EdgeDoc {
                from: platform_name(w[0]),
                to: platform_name(w[1]),
            });
        }
    }
    let crossing_overs = vec![
        EdgeDoc {
            from: platform_name(2 * (n - 1)),
            to: platform_name(2 * (n - 1) + 1),
        },
        EdgeDoc {
            from: platform_name(1),
            to: platform_name(0),
        },
    ];
    let trains = runs
        .iter()
        .map(|r| TrainDoc {
            id: r.id.clone(),
            path: r.path.iter().map(|&p| platform_name(p)).collect(),
        })
        .collect();
    let mut omega = Vec::with_capacity(2 * n);
    for s in 0..n {
        omega.push(OppositeDoc {
            i: platform_name(2 * s),
            j: platform_name(2 * s + 1),
        });
        omega.push(OppositeDoc {
            i: platform_name(2 * s + 1),
            j: platform_name(2 * s),
        });
    }
    let initial_timetable = runs
        .iter()
        .flat_map(|r| {
            r.path
                .iter()
                .zip(&r.events)
                .map(|(&p, &(arr, dep))| EventDoc {
                    train: r.id.clone(),
                    platform: platform_name(p),
                    arrival: arr,
                    departure: dep,
                })
        })
        .collect();

    Ok(InstanceDoc {
        stations,
        platforms,
        tracks,
        crossing_overs,
        trains,
        omega,
        connections: connection_docs,
        turnarounds: turnaround_docs,
        headways: headway_docs,
        params: ParamsDoc {
            r: spec.r,
            epsilon: DEFAULT_EPSILON,
            deviation: Some(spec.deviation),
            trip: trip_docs,
            dwell: dwell_docs,
            accel: accel_docs,
            brake: brake_docs,
            travel: travel_docs,
        },
        initial_timetable,
    })
}
