//! Timetable optimization engine that lines up braking trains with
//! accelerating ones so the energy fed back by regenerative brakes is
//! consumed immediately instead of being burned off.
//!
//! The pipeline: load or generate a problem instance ([`instance`]), pick at
//! most one synchronization partner per departure event ([`pairing`]), build
//! a mixed-integer model whose objective is the summed overlap of the paired
//! braking and acceleration phases ([`mip`]), solve it exactly
//! ([`solver`]), and turn overlap seconds into energy figures ([`energy`]).

pub mod error;
pub mod network;
pub mod instance;
pub mod timetable;
pub mod pairing;
pub mod mip;
pub mod solver;
pub mod energy;
pub mod generator;

pub use energy::{
    compare_reports, effective_consumption, reduction_percent, transferred_energy_kwh,
    EnergyComparison, EnergyReport, PairEnergy, PowerParams,
};
pub use error::{Error, Result};
pub use generator::{generate, GenSpec};
pub use instance::{Instance, InstanceDoc};
pub use mip::{build_model, compute_big_m, BigMMode, MipModel, ModelStats};
pub use network::{
    Coupling, HeadwayGap, ModelParams, PlatformIdx, RailNetwork, Seconds, TrainIdx, Window,
};
pub use pairing::{build_sync_pairs, Direction, SyncPair, SyncPairs};
pub use solver::{
    branch_and_bound, enumerate_oracle, extract_timetable, SolveOptions, SolveStats, SolveStatus,
    Solution,
};
pub use timetable::{
    overlap_closed_form, total_overlap, validate_timetable, EventTimes, Timetable,
    ViolationReport, FEASIBILITY_TOL,
};
