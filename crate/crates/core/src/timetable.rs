//! Timetables: arrival/departure times per (train, platform), feasibility
//! checking against the scheduling windows, and the overlap measure between
//! an acceleration phase and a braking phase.

use std::fmt;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::network::{ModelParams, PlatformIdx, RailNetwork, Seconds, TrainIdx};
use crate::pairing::SyncPair;

/// Violations smaller than this are treated as rounding noise.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Arrival and departure at one platform call.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EventTimes {
    pub arrival: Seconds,
    pub departure: Seconds,
}

/// Event times for every platform call of every train, stored in train path
/// order and addressed by (train, platform).
#[derive(Debug, Clone, PartialEq)]
pub struct Timetable {
    events: Vec<Vec<EventTimes>>,
}

impl Timetable {
    /// All-zero timetable shaped like the network's train paths.
    pub fn zeroed(net: &RailNetwork) -> Self {
        Timetable {
            events: net
                .trains
                .iter()
                .map(|t| vec![EventTimes::default(); t.path.len()])
                .collect(),
        }
    }

    pub fn at_position(&self, t: TrainIdx, pos: usize) -> EventTimes {
        self.events[t.index()][pos]
    }

    pub fn set_position(&mut self, t: TrainIdx, pos: usize, ev: EventTimes) {
        self.events[t.index()][pos] = ev;
    }

    /// Event times of train `t` at platform `p`, if the train calls there.
    pub fn at(&self, net: &RailNetwork, t: TrainIdx, p: PlatformIdx) -> Option<EventTimes> {
        net.trains[t.index()]
            .position_of(p)
            .map(|pos| self.events[t.index()][pos])
    }

    /// Like [`Timetable::at`] but failing with a named error.
    pub fn require(&self, net: &RailNetwork, t: TrainIdx, p: PlatformIdx) -> Result<EventTimes> {
        self.at(net, t, p).ok_or_else(|| Error::MissingEvent {
            train: net.train_id(t).to_string(),
            platform: net.platform_id(p).to_string(),
        })
    }

    /// Writes `train_id,platform_id,arrival_s,departure_s` rows, trains in
    /// network order and platforms in path order.
    pub fn write_csv<W: Write>(&self, net: &RailNetwork, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["train_id", "platform_id", "arrival_s", "departure_s"])?;
        for (ti, train) in net.trains.iter().enumerate() {
            for (pos, &p) in train.path.iter().enumerate() {
                let ev = self.events[ti][pos];
                w.write_record([
                    train.id.as_str(),
                    net.platform_id(p),
                    &format!("{:.3}", ev.arrival),
                    &format!("{:.3}", ev.departure),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a timetable CSV; every platform call of every train must appear
    /// exactly once.
    pub fn read_csv<R: Read>(net: &RailNetwork, input: R) -> Result<Timetable> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let mut tt = Timetable::zeroed(net);
        let mut seen: Vec<Vec<bool>> = net
            .trains
            .iter()
            .map(|t| vec![false; t.path.len()])
            .collect();

        for record in reader.records() {
            let record = record?;
            if record.len() != 4 {
                return Err(Error::Invalid(format!(
                    "timetable row has {} fields, expected 4",
                    record.len()
                )));
            }
            let train_id = &record[0];
            let platform_id = &record[1];
            let ti = net
                .trains
                .iter()
                .position(|t| t.id == train_id)
                .ok_or_else(|| Error::UnknownId {
                    kind: "train",
                    id: train_id.to_string(),
                    context: "timetable row".to_string(),
                })?;
            let pi = net
                .platforms
                .iter()
                .position(|p| p.id == platform_id)
                .ok_or_else(|| Error::UnknownId {
                    kind: "platform",
                    id: platform_id.to_string(),
                    context: "timetable row".to_string(),
                })?;
            let pos = net.trains[ti]
                .position_of(PlatformIdx(pi as u32))
                .ok_or_else(|| Error::Invalid(format!(
                    "train `{train_id}` does not call at platform `{platform_id}`"
                )))?;
            if seen[ti][pos] {
                return Err(Error::DuplicateEvent {
                    train: train_id.to_string(),
                    platform: platform_id.to_string(),
                });
            }
            seen[ti][pos] = true;
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| {
                    Error::Invalid(format!("bad {what} `{s}` for train `{train_id}`"))
                })
            };
            tt.events[ti][pos] = EventTimes {
                arrival: parse(&record[2], "arrival")?,
                departure: parse(&record[3], "departure")?,
            };
        }

        for (ti, train) in net.trains.iter().enumerate() {
            for (pos, &p) in train.path.iter().enumerate() {
                if !seen[ti][pos] {
                    return Err(Error::MissingEvent {
                        train: train.id.clone(),
                        platform: net.platform_id(p).to_string(),
                    });
                }
            }
        }
        Ok(tt)
    }
}

/// Constraint families a timetable is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintFamily {
    Trip,
    Dwell,
    Connection,
    Turnaround,
    Headway,
    Travel,
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConstraintFamily::Trip => "trip",
            ConstraintFamily::Dwell => "dwell",
            ConstraintFamily::Connection => "connection",
            ConstraintFamily::Turnaround => "turn-around",
            ConstraintFamily::Headway => "headway",
            ConstraintFamily::Travel => "travel",
        };
        f.write_str(s)
    }
}

/// One violated scheduling constraint. `slack` is the signed distance to the
/// violated bound and is always negative here (feasible rows are not listed).
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: ConstraintFamily,
    /// Train and platform ids involved, in constraint order.
    pub ids: Vec<String>,
    pub slack: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] slack {:.6}", self.family, self.ids.join(", "), self.slack)
    }
}

/// Result of checking a timetable against every scheduling window.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            writeln!(f, "feasible: no violations")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Signed slack of `v` against window `[lo, hi]`: negative iff violated.
fn window_slack(v: f64, lo: f64, hi: f64) -> f64 {
    f64::min(v - lo, hi - v)
}

/// Checks every trip, dwell, connection, turn-around, headway and total-travel
/// window. Violations beyond [`FEASIBILITY_TOL`] are reported with their
/// signed slack; a missing window or event time is an error, not a violation.
pub fn validate_timetable(
    net: &RailNetwork,
    params: &ModelParams,
    tt: &Timetable,
) -> Result<ViolationReport> {
    let mut report = ViolationReport::default();
    let mut push = |family, ids: Vec<String>, slack: f64| {
        if slack < -FEASIBILITY_TOL {
            report.violations.push(Violation { family, ids, slack });
        }
    };

    for (ti, train) in net.trains.iter().enumerate() {
        let t = TrainIdx(ti as u32);

        // Trip windows on each traversed track.
        for (pos, (from, to)) in train.edges().enumerate() {
            let w = params.trip.get(&(t, from, to)).ok_or_else(|| Error::MissingWindow {
                kind: "trip",
                key: format!("({}, {}->{})", train.id, net.platform_id(from), net.platform_id(to)),
            })?;
            let run = tt.events[ti][pos + 1].arrival - tt.events[ti][pos].departure;
            push(
                ConstraintFamily::Trip,
                vec![train.id.clone(), net.platform_id(from).into(), net.platform_id(to).into()],
                window_slack(run, w.lo, w.hi),
            );
        }

        // Dwell windows at every platform call, terminals included.
        for (pos, &p) in train.path.iter().enumerate() {
            let w = params.dwell.get(&(t, p)).ok_or_else(|| Error::MissingWindow {
                kind: "dwell",
                key: format!("({}, {})", train.id, net.platform_id(p)),
            })?;
            let dwell = tt.events[ti][pos].departure - tt.events[ti][pos].arrival;
            push(
                ConstraintFamily::Dwell,
                vec![train.id.clone(), net.platform_id(p).into()],
                window_slack(dwell, w.lo, w.hi),
            );
        }

        // Total travel: first departure to last arrival.
        let w = params.travel.get(&t).ok_or_else(|| Error::MissingWindow {
            kind: "travel",
            key: format!("({})", train.id),
        })?;
        let total = tt.events[ti].last().unwrap().arrival - tt.events[ti][0].departure;
        push(
            ConstraintFamily::Travel,
            vec![train.id.clone()],
            window_slack(total, w.lo, w.hi),
        );
    }

    // Passenger connections: departure at j after arrival at i, within window.
    for c in &net.connections {
        let w = params.connection.get(c).ok_or_else(|| Error::MissingWindow {
            kind: "connection",
            key: format!("({}, {})", net.train_id(c.t), net.train_id(c.t_next)),
        })?;
        let gap = tt.require(net, c.t_next, c.j)?.departure - tt.require(net, c.t, c.i)?.arrival;
        push(
            ConstraintFamily::Connection,
            vec![
                net.train_id(c.t).into(),
                net.train_id(c.t_next).into(),
                net.platform_id(c.i).into(),
                net.platform_id(c.j).into(),
            ],
            window_slack(gap, w.lo, w.hi),
        );
    }

    // Turn-arounds: the continuation arrives at j within a window of the
    // departure from the terminal platform i.
    for c in &net.turnarounds {
        let w = params.turnaround.get(c).ok_or_else(|| Error::MissingWindow {
            kind: "turn-around",
            key: format!("({}, {})", net.train_id(c.t), net.train_id(c.t_next)),
        })?;
        let gap = tt.require(net, c.t_next, c.j)?.arrival - tt.require(net, c.t, c.i)?.departure;
        push(
            ConstraintFamily::Turnaround,
            vec![
                net.train_id(c.t).into(),
                net.train_id(c.t_next).into(),
                net.platform_id(c.i).into(),
                net.platform_id(c.j).into(),
            ],
            window_slack(gap, w.lo, w.hi),
        );
    }

    // Headways: departure separations at both endpoints of the shared track.
    for c in &net.headways {
        let g = params.headway.get(c).ok_or_else(|| Error::MissingWindow {
            kind: "headway",
            key: format!("({}, {})", net.train_id(c.t), net.train_id(c.t_next)),
        })?;
        for (p, floor) in [(c.i, g.at_from), (c.j, g.at_to)] {
            let sep =
                tt.require(net, c.t_next, p)?.departure - tt.require(net, c.t, p)?.departure;
            push(
                ConstraintFamily::Headway,
                vec![
                    net.train_id(c.t).into(),
                    net.train_id(c.t_next).into(),
                    net.platform_id(p).into(),
                ],
                sep - floor,
            );
        }
    }

    Ok(report)
}

/// Length of the intersection between the acceleration phase
/// `[departure, departure + accel_lb]` and the braking phase
/// `[arrival - brake_lb, arrival]`, using the duration lower bounds so the
/// value survives any trip-time realization.
///
/// Closed form: `max(0, min(accel_lb, brake_lb, departure - arrival + accel_lb
/// + brake_lb, arrival - departure))`.
pub fn overlap_closed_form(
    departure: Seconds,
    arrival: Seconds,
    accel_lb: Seconds,
    brake_lb: Seconds,
) -> Seconds {
    let span = departure - arrival + accel_lb + brake_lb;
    let gap = arrival - departure;
    f64::max(0.0, accel_lb.min(brake_lb).min(span).min(gap))
}

/// Total overlap over a set of synchronization pairs at the given timetable,
/// orienting each pair as (accelerating train, braking train).
pub fn total_overlap(
    net: &RailNetwork,
    pairs: &[SyncPair],
    tt: &Timetable,
) -> Result<Seconds> {
    let mut total = 0.0;
    for pair in pairs {
        let (at, ap) = pair.accel();
        let (bt, bp) = pair.brake();
        let dep = tt.require(net, at, ap)?.departure;
        let arr = tt.require(net, bt, bp)?.arrival;
        total += overlap_closed_form(dep, arr, pair.accel_lb, pair.brake_lb);
    }
    Ok(total)
}
