//! Synchronization pairs: for each train calling at a platform of an opposite
//! pair, find the temporally closest train on the facing platform whose braking
//! can absorb the first train's acceleration (or vice versa), within the
//! pairing radius.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::network::{ModelParams, PlatformIdx, RailNetwork, Seconds, TrainIdx};
use crate::timetable::Timetable;

/// Which side of the reference train the partner's midpoint lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    /// Partner dwells later: the reference train accelerates, the partner brakes.
    Right,
    /// Partner dwells earlier: the partner accelerates, the reference train brakes.
    Left,
}

/// One synchronizable pair: reference train `t` at platform `i`, partner at
/// the opposite platform `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncPair {
    pub i: PlatformIdx,
    pub j: PlatformIdx,
    pub t: TrainIdx,
    pub partner: TrainIdx,
    pub direction: Direction,
    /// Acceleration-phase duration lower bound of the accelerating train.
    pub accel_lb: Seconds,
    /// Braking-phase duration lower bound of the braking train.
    pub brake_lb: Seconds,
    /// Signed initial midpoint gap, partner minus reference (nonnegative for
    /// right pairs, negative for left pairs).
    pub midpoint_gap: Seconds,
    /// Sign of the divisor behind the ordering row; positive by construction
    /// because right pairs have nonnegative gap plus the epsilon margin and
    /// left pairs have strictly positive gap.
    pub order_sign: i8,
}

impl SyncPair {
    /// (train, platform) of the accelerating side.
    pub fn accel(&self) -> (TrainIdx, PlatformIdx) {
        match self.direction {
            Direction::Right => (self.t, self.i),
            Direction::Left => (self.partner, self.j),
        }
    }

    /// (train, platform) of the braking side.
    pub fn brake(&self) -> (TrainIdx, PlatformIdx) {
        match self.direction {
            Direction::Right => (self.partner, self.j),
            Direction::Left => (self.t, self.i),
        }
    }
}

/// Dwell midpoint of train `t` at platform `i`: `(arrival + departure) / 2`.
pub fn midpoint(net: &RailNetwork, tt: &Timetable, t: TrainIdx, i: PlatformIdx) -> Result<Seconds> {
    let ev = tt.require(net, t, i)?;
    Ok(0.5 * (ev.arrival + ev.departure))
}

/// Searches `candidates` for the train whose midpoint gap to `mid_ref`
/// satisfies `pred`, minimizing the absolute gap; ties go to the
/// lexicographically smallest train id.
fn closest_candidate(
    net: &RailNetwork,
    tt: &Timetable,
    j: PlatformIdx,
    mid_ref: Seconds,
    pred: impl Fn(Seconds) -> bool,
) -> Result<Option<(TrainIdx, Seconds)>> {
    let mut best: Option<(TrainIdx, Seconds)> = None;
    for cand in net.trains_at(j) {
        let gap = midpoint(net, tt, cand, j)? - mid_ref;
        if !pred(gap) {
            continue;
        }
        let better = match best {
            None => true,
            Some((bt, bgap)) => {
                let (a, b) = (gap.abs(), bgap.abs());
                a < b || (a == b && net.train_id(cand) < net.train_id(bt))
            }
        };
        if better {
            best = Some((cand, gap));
        }
    }
    Ok(best)
}

/// Closest train at `j` dwelling no earlier than `t` at `i`, within radius:
/// midpoint gap in `[0, r]`.
pub fn closest_right(
    net: &RailNetwork,
    tt: &Timetable,
    r: Seconds,
    i: PlatformIdx,
    j: PlatformIdx,
    t: TrainIdx,
) -> Result<Option<(TrainIdx, Seconds)>> {
    let mid_ref = midpoint(net, tt, t, i)?;
    closest_candidate(net, tt, j, mid_ref, |gap| gap >= 0.0 && gap <= r)
}

/// Closest train at `j` dwelling strictly earlier than `t` at `i`, within
/// radius: midpoint gap in `[-r, 0)`.
pub fn closest_left(
    net: &RailNetwork,
    tt: &Timetable,
    r: Seconds,
    i: PlatformIdx,
    j: PlatformIdx,
    t: TrainIdx,
) -> Result<Option<(TrainIdx, Seconds)>> {
    let mid_ref = midpoint(net, tt, t, i)?;
    closest_candidate(net, tt, j, mid_ref, |gap| gap < 0.0 && gap >= -r)
}

/// The partner for `(i, j, t)`: the nearer of the right and left candidates,
/// preferring right on a tie. Returns the partner, its side and the signed gap.
pub fn closest(
    net: &RailNetwork,
    tt: &Timetable,
    r: Seconds,
    i: PlatformIdx,
    j: PlatformIdx,
    t: TrainIdx,
) -> Result<Option<(TrainIdx, Direction, Seconds)>> {
    let right = closest_right(net, tt, r, i, j, t)?;
    let left = closest_left(net, tt, r, i, j, t)?;
    Ok(match (right, left) {
        (None, None) => None,
        (Some((p, g)), None) => Some((p, Direction::Right, g)),
        (None, Some((p, g))) => Some((p, Direction::Left, g)),
        (Some((rp, rg)), Some((lp, lg))) => {
            if rg.abs() <= lg.abs() {
                Some((rp, Direction::Right, rg))
            } else {
                Some((lp, Direction::Left, lg))
            }
        }
    })
}

/// All synchronization pairs, split by side and sorted by `(i, j, t)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SyncPairs {
    pub right: Vec<SyncPair>,
    pub left: Vec<SyncPair>,
}

impl SyncPairs {
    pub fn len(&self) -> usize {
        self.right.len() + self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.right.is_empty() && self.left.is_empty()
    }

    /// Right pairs followed by left pairs; this is the canonical pair order
    /// used for model variables.
    pub fn all(&self) -> impl Iterator<Item = &SyncPair> {
        self.right.iter().chain(self.left.iter())
    }
}

/// Builds the pair set from the initial timetable: one pair per `(i, j, t)`
/// with a partner within the radius. The accelerating side's duration lower
/// bound comes from its acceleration window, the braking side's from its
/// braking window; both must be present in the parameters.
pub fn build_sync_pairs(
    net: &RailNetwork,
    params: &ModelParams,
    tt: &Timetable,
) -> Result<SyncPairs> {
    let mut by_key: BTreeMap<(PlatformIdx, PlatformIdx, TrainIdx), SyncPair> = BTreeMap::new();

    for &(i, j) in &net.opposite_pairs {
        for t in net.trains_at(i) {
            let Some((partner, direction, gap)) = closest(net, tt, params.r, i, j, t)? else {
                continue;
            };
            let (accel_key, brake_key) = match direction {
                Direction::Right => ((t, i), (partner, j)),
                Direction::Left => ((partner, j), (t, i)),
            };
            let accel_lb = params
                .accel
                .get(&accel_key)
                .ok_or_else(|| Error::MissingWindow {
                    kind: "acceleration phase",
                    key: format!(
                        "({}, {})",
                        net.train_id(accel_key.0),
                        net.platform_id(accel_key.1)
                    ),
                })?
                .lo;
            let brake_lb = params
                .brake
                .get(&brake_key)
                .ok_or_else(|| Error::MissingWindow {
                    kind: "braking phase",
                    key: format!(
                        "({}, {})",
                        net.train_id(brake_key.0),
                        net.platform_id(brake_key.1)
                    ),
                })?
                .lo;
            by_key.entry((i, j, t)).or_insert(SyncPair {
                i,
                j,
                t,
                partner,
                direction,
                accel_lb,
                brake_lb,
                midpoint_gap: gap,
                order_sign: 1,
            });
        }
    }

    let mut pairs = SyncPairs::default();
    for (_, p) in by_key {
        match p.direction {
            Direction::Right => pairs.right.push(p),
            Direction::Left => pairs.left.push(p),
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{
        Line, Platform, RailNetwork, Station, StationIdx, LineIdx, Track, Train, Window,
        ModelParams,
    };
    use crate::timetable::EventTimes;

    /// One station pair with opposite platforms P0 (line A) and P1 (line B);
    /// trains A* call at P0, trains B* call at P1. Extra shared platforms P2/P3
    /// exist only so each train has a two-platform path.
    fn pairing_net(trains_at_p0: &[&str], trains_at_p1: &[&str]) -> RailNetwork {
        let mut trains = Vec::new();
        for &id in trains_at_p0 {
            trains.push(Train { id: id.into(), path: vec![PlatformIdx(0), PlatformIdx(2)] });
        }
        for &id in trains_at_p1 {
            trains.push(Train { id: id.into(), path: vec![PlatformIdx(1), PlatformIdx(3)] });
        }
        RailNetwork {
            stations: vec![Station { id: "S0".into() }, Station { id: "S1".into() }],
            lines: vec![Line { id: "A".into() }, Line { id: "B".into() }],
            platforms: vec![
                Platform { id: "P0".into(), station: StationIdx(0), line: LineIdx(0) },
                Platform { id: "P1".into(), station: StationIdx(0), line: LineIdx(1) },
                Platform { id: "P2".into(), station: StationIdx(1), line: LineIdx(0) },
                Platform { id: "P3".into(), station: StationIdx(1), line: LineIdx(1) },
            ],
            tracks: vec![
                Track { from: PlatformIdx(0), to: PlatformIdx(2) },
                Track { from: PlatformIdx(1), to: PlatformIdx(3) },
            ],
            crossing_overs: vec![],
            trains,
            opposite_pairs: vec![(PlatformIdx(0), PlatformIdx(1))],
            connections: vec![],
            turnarounds: vec![],
            headways: vec![],
        }
    }

    fn with_midpoints(net: &RailNetwork, mids: &[f64]) -> Timetable {
        let mut tt = Timetable::zeroed(net);
        for (ti, &mid) in mids.iter().enumerate() {
            // 20 s dwell centered on the midpoint; the second platform call is
            // far away and irrelevant to pairing at the first.
            tt.set_position(
                TrainIdx(ti as u32),
                0,
                EventTimes { arrival: mid - 10.0, departure: mid + 10.0 },
            );
            tt.set_position(
                TrainIdx(ti as u32),
                1,
                EventTimes { arrival: mid + 200.0, departure: mid + 220.0 },
            );
        }
        tt
    }

    fn params_for(net: &RailNetwork, r: f64) -> ModelParams {
        let mut params = ModelParams { r, ..ModelParams::default() };
        for (ti, train) in net.trains.iter().enumerate() {
            for &p in &train.path {
                params.accel.insert((TrainIdx(ti as u32), p), Window::new(15.0, 20.0));
                params.brake.insert((TrainIdx(ti as u32), p), Window::new(20.0, 25.0));
            }
        }
        params
    }

    #[test]
    fn midpoint_is_mean_of_arrival_and_departure() {
        let net = pairing_net(&["A1"], &[]);
        let mut tt = Timetable::zeroed(&net);
        tt.set_position(TrainIdx(0), 0, EventTimes { arrival: 100.0, departure: 120.0 });
        assert_eq!(midpoint(&net, &tt, TrainIdx(0), PlatformIdx(0)).unwrap(), 110.0);
    }

    #[test]
    fn closest_prefers_right_on_tie() {
        // Partners at gaps -5 (B1) and +5 (B2): tie in distance, right wins.
        let net = pairing_net(&["A1"], &["B1", "B2"]);
        let tt = with_midpoints(&net, &[100.0, 95.0, 105.0]);
        let (partner, dir, gap) =
            closest(&net, &tt, 300.0, PlatformIdx(0), PlatformIdx(1), TrainIdx(0))
                .unwrap()
                .unwrap();
        assert_eq!(net.train_id(partner), "B2");
        assert_eq!(dir, Direction::Right);
        assert_eq!(gap, 5.0);
    }

    #[test]
    fn equal_gap_candidates_resolve_by_train_id() {
        // Two right candidates at the same gap; the smaller id wins.
        let net = pairing_net(&["A1"], &["B9", "B2"]);
        let tt = with_midpoints(&net, &[100.0, 103.0, 103.0]);
        let (partner, _gap) =
            closest_right(&net, &tt, 300.0, PlatformIdx(0), PlatformIdx(1), TrainIdx(0))
                .unwrap()
                .unwrap();
        assert_eq!(net.train_id(partner), "B2");
    }

    #[test]
    fn radius_is_inclusive_and_zero_gap_is_right_only() {
        let net = pairing_net(&["A1"], &["B1"]);
        // Gap exactly r: still a right pair.
        let tt = with_midpoints(&net, &[100.0, 400.0]);
        assert!(
            closest_right(&net, &tt, 300.0, PlatformIdx(0), PlatformIdx(1), TrainIdx(0))
                .unwrap()
                .is_some()
        );
        // Gap just beyond r: no pair either side.
        let tt = with_midpoints(&net, &[100.0, 400.1]);
        assert!(closest(&net, &tt, 300.0, PlatformIdx(0), PlatformIdx(1), TrainIdx(0))
            .unwrap()
            .is_none());
        // Zero gap counts as right, never left.
        let tt = with_midpoints(&net, &[100.0, 100.0]);
        assert!(
            closest_left(&net, &tt, 300.0, PlatformIdx(0), PlatformIdx(1), TrainIdx(0))
                .unwrap()
                .is_none()
        );
        let (_, dir, gap) = closest(&net, &tt, 300.0, PlatformIdx(0), PlatformIdx(1), TrainIdx(0))
            .unwrap()
            .unwrap();
        assert_eq!(dir, Direction::Right);
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn pair_roles_follow_direction() {
        let net = pairing_net(&["A1"], &["B1"]);
        let params = params_for(&net, 300.0);
        // B1 later than A1: right pair, A1 accelerates, B1 brakes.
        let tt = with_midpoints(&net, &[100.0, 103.0]);
        let pairs = build_sync_pairs(&net, &params, &tt).unwrap();
        assert_eq!(pairs.right.len(), 1);
        assert_eq!(pairs.left.len(), 0);
        let p = &pairs.right[0];
        assert_eq!(p.accel(), (TrainIdx(0), PlatformIdx(0)));
        assert_eq!(p.brake(), (TrainIdx(1), PlatformIdx(1)));
        assert_eq!(p.accel_lb, 15.0);
        assert_eq!(p.brake_lb, 20.0);
        assert_eq!(p.midpoint_gap, 3.0);
        assert_eq!(p.order_sign, 1);

        // B1 earlier than A1: left pair, roles swap.
        let tt = with_midpoints(&net, &[100.0, 96.0]);
        let pairs = build_sync_pairs(&net, &params, &tt).unwrap();
        assert_eq!(pairs.right.len(), 0);
        assert_eq!(pairs.left.len(), 1);
        let p = &pairs.left[0];
        assert_eq!(p.accel(), (TrainIdx(1), PlatformIdx(1)));
        assert_eq!(p.brake(), (TrainIdx(0), PlatformIdx(0)));
        assert_eq!(p.midpoint_gap, -4.0);
    }

    #[test]
    fn each_reference_train_appears_at_most_once() {
        let net = pairing_net(&["A1", "A2"], &["B1", "B2", "B3"]);
        let params = params_for(&net, 300.0);
        let tt = with_midpoints(&net, &[100.0, 150.0, 90.0, 120.0, 160.0]);
        let pairs = build_sync_pairs(&net, &params, &tt).unwrap();
        let mut keys: Vec<_> = pairs.all().map(|p| (p.i, p.j, p.t)).collect();
        keys.dedup();
        assert_eq!(keys.len(), pairs.len(), "duplicate (i, j, t) pair");
        // Both reference trains found some partner within r.
        assert_eq!(pairs.len(), 2);
    }

    #[test]
    fn brute_force_scan_agrees() {
        // Independent oracle: for each (i, j, t) enumerate all candidates and
        // reproduce the selection rule directly.
        let net = pairing_net(
            &["A1", "A2", "A3"],
            &["B1", "B2", "B3", "B4"],
        );
        let params = params_for(&net, 40.0);
        let mids = [100.0, 170.0, 260.0, 120.0, 125.0, 210.0, 320.0];
        let tt = with_midpoints(&net, &mids);
        let pairs = build_sync_pairs(&net, &params, &tt).unwrap();

        for (ti, &mid) in mids.iter().enumerate().take(3) {
            let mut best: Option<(usize, f64)> = None;
            for (ci, &cmid) in mids.iter().enumerate().skip(3) {
                let gap: f64 = cmid - mid;
                if gap.abs() > 40.0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, bgap)) => {
                        gap.abs() < bgap.abs()
                            // right (nonnegative gap) beats left at equal distance
                            || (gap.abs() == bgap.abs() && gap >= 0.0 && bgap < 0.0)
                            || (gap == bgap && net.trains[ci].id < net.trains[bi].id)
                    }
                };
                if better {
                    best = Some((ci, gap));
                }
            }
            let found = pairs.all().find(|p| p.t == TrainIdx(ti as u32));
            match best {
                None => assert!(found.is_none(), "train {ti} should be unpaired"),
                Some((ci, gap)) => {
                    let p = found.expect("pair expected");
                    assert_eq!(p.partner, TrainIdx(ci as u32));
                    assert_eq!(p.midpoint_gap, gap);
                }
            }
        }
    }
}
