//! Fixtures shared by the integration suites.

#![allow(dead_code)] // each test target uses its own subset

use railsync_core::network::{
    validate_network, Line, LineIdx, Platform, Station, StationIdx, Track, Train,
};
use railsync_core::{
    branch_and_bound, build_model, build_sync_pairs, generate, BigMMode, EventTimes, GenSpec,
    Instance, MipModel, ModelParams, PlatformIdx, RailNetwork, Solution, SolveOptions,
    SyncPairs, Timetable, TrainIdx, Window,
};

/// Generates and loads a corridor instance of the given size.
pub fn mini(trains: usize, stations: usize, seed: u64) -> Instance {
    let spec = GenSpec {
        trains,
        stations,
        seed,
        ..GenSpec::default()
    };
    generate(&spec)
        .expect("generator spec is valid")
        .load()
        .expect("generated documents load")
}

/// Pairs the instance and builds its model with derived big-M constants.
pub fn model_of(inst: &Instance) -> (SyncPairs, MipModel) {
    let pairs = build_sync_pairs(&inst.network, &inst.params, &inst.initial)
        .expect("pairing succeeds on generated instances");
    let model = build_model(
        &inst.network,
        &inst.params,
        &pairs,
        &inst.initial,
        BigMMode::Auto,
    )
    .expect("model builds");
    (pairs, model)
}

pub fn solve(model: &MipModel) -> Solution {
    branch_and_bound(model, &SolveOptions::default()).expect("search completes")
}

/// One train per tuple on each side of a single facing platform pair
/// (`P0`/`P1`); tuples are (dwell midpoint, accel duration lb, brake
/// duration lb). Scheduling windows are wide; only `deviation` limits how
/// far events may move from the initial timetable.
pub fn facing_fixture(
    r: f64,
    deviation: f64,
    side_a: &[(f64, f64, f64)],
    side_b: &[(f64, f64, f64)],
) -> (RailNetwork, ModelParams, Timetable) {
    let mut trains = Vec::new();
    for k in 0..side_a.len() {
        trains.push(Train {
            id: format!("A{}", k + 1),
            path: vec![PlatformIdx(0), PlatformIdx(2)],
        });
    }
    for k in 0..side_b.len() {
        trains.push(Train {
            id: format!("B{}", k + 1),
            path: vec![PlatformIdx(1), PlatformIdx(3)],
        });
    }
    let net = RailNetwork {
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
    };
    assert!(validate_network(&net).is_empty(), "fixture net is sound");

    let mut params = ModelParams {
        r,
        deviation: Some(deviation),
        ..ModelParams::default()
    };
    let mut tt = Timetable::zeroed(&net);
    let specs = side_a.iter().chain(side_b.iter());
    for (ti, &(mid, accel_lb, brake_lb)) in specs.enumerate() {
        let t = TrainIdx(ti as u32);
        let train = &net.trains[ti];
        for (from, to) in train.edges() {
            params.trip.insert((t, from, to), Window::new(150.0, 260.0));
        }
        for &p in &train.path {
            params.dwell.insert((t, p), Window::new(10.0, 30.0));
            params.accel.insert((t, p), Window::new(accel_lb, accel_lb + 5.0));
            params.brake.insert((t, p), Window::new(brake_lb, brake_lb + 5.0));
        }
        params.travel.insert(t, Window::new(0.0, 1000.0));
        tt.set_position(t, 0, EventTimes { arrival: mid - 10.0, departure: mid + 10.0 });
        tt.set_position(t, 1, EventTimes { arrival: mid + 200.0, departure: mid + 220.0 });
    }
    (net, params, tt)
}
