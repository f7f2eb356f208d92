//! Energy accounting on top of overlap times.
//!
//! A constant-power model stands in for simulated power-versus-time curves:
//! each acceleration phase draws its train's acceleration power for the
//! robust duration floor, each synchronized overlap transfers the smaller of
//! the acceleration draw and the efficiency-scaled regenerative supply, and
//! everything integrates exactly as rectangles.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::network::{ModelParams, PlatformIdx, RailNetwork, Seconds, TrainIdx};
use crate::pairing::SyncPair;
use crate::timetable::{overlap_closed_form, Timetable};

const KJ_PER_KWH: f64 = 3600.0;
/// Slack allowed when checking overlap values against their closed form.
pub const SIGMA_CONSISTENCY_TOL: f64 = 1e-6;

/// Constant-power model parameters. Acceleration power may be overridden per
/// (train, platform); regenerative supply and efficiency are uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerParams {
    /// Uniform traction draw while accelerating, kW.
    pub accel_kw: f64,
    /// Power a braking train feeds back, kW.
    pub regen_kw: f64,
    /// Fraction of regenerated power that survives transmission, in (0, 1].
    pub efficiency: f64,
    /// Non-accelerating consumption per track traversal, kWh.
    pub base_kwh_per_trip: f64,
    /// Per-(train, platform) acceleration power overriding [`Self::accel_kw`].
    pub accel_overrides: BTreeMap<(TrainIdx, PlatformIdx), f64>,
}

impl Default for PowerParams {
    fn default() -> Self {
        PowerParams {
            accel_kw: 2000.0,
            regen_kw: 1500.0,
            efficiency: 0.9,
            base_kwh_per_trip: 0.0,
            accel_overrides: BTreeMap::new(),
        }
    }
}

impl PowerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.accel_kw > 0.0) {
            return Err(Error::Energy(format!(
                "acceleration power must be positive, got {}",
                self.accel_kw
            )));
        }
        if !(self.regen_kw > 0.0) {
            return Err(Error::Energy(format!(
                "regenerative power must be positive, got {}",
                self.regen_kw
            )));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::Energy(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            )));
        }
        if !(self.base_kwh_per_trip >= 0.0) {
            return Err(Error::Energy(format!(
                "base energy per trip must be non-negative, got {}",
                self.base_kwh_per_trip
            )));
        }
        for (&(t, p), &kw) in &self.accel_overrides {
            if !(kw > 0.0) {
                return Err(Error::Energy(format!(
                    "acceleration power override for train {} platform {} must be positive, got {kw}",
                    t.0, p.0
                )));
            }
        }
        Ok(())
    }

    /// Acceleration power of a train departing a platform, kW.
    pub fn accel_power_at(&self, t: TrainIdx, p: PlatformIdx) -> f64 {
        self.accel_overrides
            .get(&(t, p))
            .copied()
            .unwrap_or(self.accel_kw)
    }
}

/// Energy moved from a braking train to an accelerating one over a
/// synchronized overlap, kWh: the receiving side cannot absorb more than its
/// own draw, the sending side cannot deliver more than its efficiency-scaled
/// supply.
pub fn transferred_energy_kwh(sigma: Seconds, accel_kw: f64, pp: &PowerParams) -> f64 {
    f64::min(accel_kw, pp.efficiency * pp.regen_kw) * sigma / KJ_PER_KWH
}

/// One synchronized pair's contribution to the energy balance.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEnergy {
    /// Position in the pair list fed to [`effective_consumption`].
    pub pair: usize,
    /// Overlap seconds realized by the timetable.
    pub sigma: Seconds,
    pub transferred_kwh: f64,
}

/// Energy balance of one timetable under a [`PowerParams`] model.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// Substation energy drawn by all acceleration phases plus base trips.
    pub traction_kwh: f64,
    /// Total regenerated energy re-used thanks to synchronization.
    pub transferred_kwh: f64,
    /// `traction - transferred`: what the substations actually supply.
    pub effective_kwh: f64,
    pub pairs: Vec<PairEnergy>,
}

impl fmt::Display for EnergyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "traction     {:>12.2} kWh", self.traction_kwh)?;
        writeln!(f, "transferred  {:>12.2} kWh", self.transferred_kwh)?;
        write!(f, "effective    {:>12.2} kWh", self.effective_kwh)
    }
}

/// Computes the energy balance of a timetable: traction energy over every
/// modeled acceleration phase (duration floor × power) plus per-trip base
/// energy, minus the energy transferred across the given pair overlaps.
///
/// Each overlap is checked against the closed form implied by the
/// timetable's event times; a value exceeding it means the overlaps and the
/// timetable do not describe the same solution, which is an error.
pub fn effective_consumption(
    net: &RailNetwork,
    params: &ModelParams,
    tt: &Timetable,
    pairs: &[SyncPair],
    sigmas: &[Seconds],
    pp: &PowerParams,
) -> Result<EnergyReport> {
    pp.validate()?;
    if pairs.len() != sigmas.len() {
        return Err(Error::Energy(format!(
            "{} pairs but {} overlap values",
            pairs.len(),
            sigmas.len()
        )));
    }

    let mut traction_kwh = 0.0;
    for (&(t, p), w) in &params.accel {
        traction_kwh += pp.accel_power_at(t, p) * w.lo / KJ_PER_KWH;
    }
    for train in &net.trains {
        let trips = train.path.len().saturating_sub(1);
        traction_kwh += pp.base_kwh_per_trip * trips as f64;
    }

    let mut pair_rows = Vec::with_capacity(pairs.len());
    let mut transferred_kwh = 0.0;
    for (k, (pair, &sigma)) in pairs.iter().zip(sigmas).enumerate() {
        if !(sigma >= 0.0) {
            return Err(Error::Energy(format!(
                "pair {k}: overlap must be non-negative, got {sigma}"
            )));
        }
        let (at, ap) = pair.accel();
        let (bt, bp) = pair.brake();
        let dep = tt
            .at(net, at, ap)
            .ok_or_else(|| Error::MissingEvent {
                train: net.train_id(at).to_string(),
                platform: net.platform_id(ap).to_string(),
            })?
            .departure;
        let arr = tt
            .at(net, bt, bp)
            .ok_or_else(|| Error::MissingEvent {
                train: net.train_id(bt).to_string(),
                platform: net.platform_id(bp).to_string(),
            })?
            .arrival;
        let closed = overlap_closed_form(dep, arr, pair.accel_lb, pair.brake_lb);
        if sigma > closed + SIGMA_CONSISTENCY_TOL {
            return Err(Error::Energy(format!(
                "pair {k}: overlap {sigma} exceeds the {closed} supported by the timetable"
            )));
        }
        let kwh = transferred_energy_kwh(sigma, pp.accel_power_at(at, ap), pp);
        transferred_kwh += kwh;
        pair_rows.push(PairEnergy {
            pair: k,
            sigma,
            transferred_kwh: kwh,
        });
    }

    Ok(EnergyReport {
        traction_kwh,
        transferred_kwh,
        effective_kwh: traction_kwh - transferred_kwh,
        pairs: pair_rows,
    })
}

/// Percent by which effective consumption fell from a reference value.
/// Negative when consumption rose.
pub fn reduction_percent(reference_kwh: f64, new_kwh: f64) -> Result<f64> {
    if reference_kwh == 0.0 {
        return Err(Error::Energy(
            "reference effective consumption is zero; reduction undefined".to_string(),
        ));
    }
    Ok(100.0 * (reference_kwh - new_kwh) / reference_kwh)
}

/// Side-by-side change between two energy reports of the same instance.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyComparison {
    pub reduction_percent: f64,
    pub traction_delta_kwh: f64,
    pub transferred_delta_kwh: f64,
    pub effective_delta_kwh: f64,
}

impl fmt::Display for EnergyComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "traction     {:>+12.2} kWh", self.traction_delta_kwh)?;
        writeln!(f, "transferred  {:>+12.2} kWh", self.transferred_delta_kwh)?;
        writeln!(f, "effective    {:>+12.2} kWh", self.effective_delta_kwh)?;
        write!(f, "reduction    {:>12.2} %", self.reduction_percent)
    }
}

/// Compares an optimized report against the reference it improves on.
pub fn compare_reports(before: &EnergyReport, after: &EnergyReport) -> Result<EnergyComparison> {
    Ok(EnergyComparison {
        reduction_percent: reduction_percent(before.effective_kwh, after.effective_kwh)?,
        traction_delta_kwh: after.traction_kwh - before.traction_kwh,
        transferred_delta_kwh: after.transferred_kwh - before.transferred_kwh,
        effective_delta_kwh: after.effective_kwh - before.effective_kwh,
    })
}
