//! On-disk problem format: a single JSON document holding the network, the
//! scheduling windows and the initial timetable, linked into index-based
//! runtime structures on load and emitted back verbatim on save.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{
    Coupling, CrossingOver, HeadwayGap, Line, LineIdx, ModelParams, Platform, PlatformIdx,
    RailNetwork, Station, StationIdx, Track, Train, TrainIdx, Window, DEFAULT_EPSILON,
    DEFAULT_PAIRING_RADIUS,
};
use crate::timetable::{EventTimes, Timetable};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformDoc {
    pub id: String,
    pub station: String,
    pub line: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainDoc {
    pub id: String,
    pub path: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OppositeDoc {
    pub i: String,
    pub j: String,
}

/// A coupled pair of train services at two platforms, with its window.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingDoc {
    pub i: String,
    pub j: String,
    pub t: String,
    pub t_prime: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadwayDoc {
    pub i: String,
    pub j: String,
    pub t: String,
    pub t_prime: String,
    pub h_i: f64,
    pub h_j: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripDoc {
    pub train: String,
    pub from: String,
    pub to: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CallDoc {
    pub train: String,
    pub platform: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TravelDoc {
    pub train: String,
    pub lo: f64,
    pub hi: f64,
}

fn default_radius() -> f64 {
    DEFAULT_PAIRING_RADIUS
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    /// Pairing radius in seconds.
    #[serde(default = "default_radius")]
    pub r: f64,
    /// Strict-inequality margin of the indicator rows.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Maximum deviation of any event from the initial timetable; absent
    /// means event times are unrestricted.
    #[serde(default)]
    pub deviation: Option<f64>,
    #[serde(default)]
    pub trip: Vec<TripDoc>,
    #[serde(default)]
    pub dwell: Vec<CallDoc>,
    #[serde(default)]
    pub accel: Vec<CallDoc>,
    #[serde(default)]
    pub brake: Vec<CallDoc>,
    #[serde(default)]
    pub travel: Vec<TravelDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventDoc {
    pub train: String,
    pub platform: String,
    pub arrival: f64,
    pub departure: f64,
}

/// The complete problem document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub stations: Vec<String>,
    pub platforms: Vec<PlatformDoc>,
    pub tracks: Vec<EdgeDoc>,
    #[serde(default)]
    pub crossing_overs: Vec<EdgeDoc>,
    pub trains: Vec<TrainDoc>,
    /// Opposite-platform pairs eligible for synchronization.
    #[serde(default)]
    pub omega: Vec<OppositeDoc>,
    #[serde(default)]
    pub connections: Vec<CouplingDoc>,
    #[serde(default)]
    pub turnarounds: Vec<CouplingDoc>,
    #[serde(default)]
    pub headways: Vec<HeadwayDoc>,
    pub params: ParamsDoc,
    pub initial_timetable: Vec<EventDoc>,
}

/// A loaded instance: the linked network, its windows and the initial
/// timetable.
#[derive(Debug, Clone)]
pub struct Instance {
    pub network: RailNetwork,
    pub params: ModelParams,
    pub initial: Timetable,
}

struct Resolver {
    platforms: HashMap<String, PlatformIdx>,
    trains: HashMap<String, TrainIdx>,
}

impl Resolver {
    fn platform(&self, id: &str, context: &str) -> Result<PlatformIdx> {
        self.platforms
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownId {
                kind: "platform",
                id: id.to_string(),
                context: context.to_string(),
            })
    }

    fn train(&self, id: &str, context: &str) -> Result<TrainIdx> {
        self.trains.get(id).copied().ok_or_else(|| Error::UnknownId {
            kind: "train",
            id: id.to_string(),
            context: context.to_string(),
        })
    }
}

fn coupling(r: &Resolver, d: &CouplingDoc, context: &str) -> Result<Coupling> {
    Ok(Coupling {
        i: r.platform(&d.i, context)?,
        j: r.platform(&d.j, context)?,
        t: r.train(&d.t, context)?,
        t_next: r.train(&d.t_prime, context)?,
    })
}

impl InstanceDoc {
    pub fn read_json(path: &Path) -> Result<InstanceDoc> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(std::fs::write(path, text)?)
    }

    /// Links ids to indices and splits the document into network, windows and
    /// initial timetable.
    pub fn load(&self) -> Result<Instance> {
        let mut stations = HashMap::new();
        for (k, id) in self.stations.iter().enumerate() {
            if stations.insert(id.clone(), StationIdx(k as u32)).is_some() {
                return Err(Error::DuplicateId {
                    kind: "station",
                    id: id.clone(),
                });
            }
        }

        // Lines are the distinct line labels of the platforms, in first
        // appearance order.
        let mut lines: HashMap<String, LineIdx> = HashMap::new();
        let mut line_list: Vec<Line> = Vec::new();
        for p in &self.platforms {
            if !lines.contains_key(&p.line) {
                lines.insert(p.line.clone(), LineIdx(line_list.len() as u32));
                line_list.push(Line { id: p.line.clone() });
            }
        }

        let mut platforms = HashMap::new();
        let mut platform_list = Vec::with_capacity(self.platforms.len());
        for (k, p) in self.platforms.iter().enumerate() {
            if platforms.insert(p.id.clone(), PlatformIdx(k as u32)).is_some() {
                return Err(Error::DuplicateId {
                    kind: "platform",
                    id: p.id.clone(),
                });
            }
            let station = *stations.get(&p.station).ok_or_else(|| Error::UnknownId {
                kind: "station",
                id: p.station.clone(),
                context: format!("platform {}", p.id),
            })?;
            platform_list.push(Platform {
                id: p.id.clone(),
                station,
                line: lines[&p.line],
            });
        }

        let mut trains = HashMap::new();
        for (k, t) in self.trains.iter().enumerate() {
            if trains.insert(t.id.clone(), TrainIdx(k as u32)).is_some() {
                return Err(Error::DuplicateId {
                    kind: "train",
                    id: t.id.clone(),
                });
            }
        }

        let r = Resolver { platforms, trains };

        let mut train_list = Vec::with_capacity(self.trains.len());
        for t in &self.trains {
            let context = format!("path of train {}", t.id);
            let path = t
                .path
                .iter()
                .map(|p| r.platform(p, &context))
                .collect::<Result<Vec<_>>>()?;
            train_list.push(Train {
                id: t.id.clone(),
                path,
            });
        }

        let tracks = self
            .tracks
            .iter()
            .map(|e| {
                Ok(Track {
                    from: r.platform(&e.from, "track")?,
                    to: r.platform(&e.to, "track")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let crossing_overs = self
            .crossing_overs
            .iter()
            .map(|e| {
                Ok(CrossingOver {
                    from: r.platform(&e.from, "crossing-over")?,
                    to: r.platform(&e.to, "crossing-over")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let opposite_pairs = self
            .omega
            .iter()
            .map(|o| Ok((r.platform(&o.i, "omega")?, r.platform(&o.j, "omega")?)))
            .collect::<Result<Vec<_>>>()?;

        let mut params = ModelParams {
            r: self.params.r,
            epsilon: self.params.epsilon,
            deviation: self.params.deviation,
            ..ModelParams::default()
        };

        let mut connections = Vec::with_capacity(self.connections.len());
        for d in &self.connections {
            let c = coupling(&r, d, "connection")?;
            connections.push(c);
            params.connection.insert(c, Window::new(d.lo, d.hi));
        }
        let mut turnarounds = Vec::with_capacity(self.turnarounds.len());
        for d in &self.turnarounds {
            let c = coupling(&r, d, "turn-around")?;
            turnarounds.push(c);
            params.turnaround.insert(c, Window::new(d.lo, d.hi));
        }
        let mut headways = Vec::with_capacity(self.headways.len());
        for d in &self.headways {
            let c = Coupling {
                i: r.platform(&d.i, "headway")?,
                j: r.platform(&d.j, "headway")?,
                t: r.train(&d.t, "headway")?,
                t_next: r.train(&d.t_prime, "headway")?,
            };
            headways.push(c);
            params.headway.insert(
                c,
                HeadwayGap {
                    at_from: d.h_i,
                    at_to: d.h_j,
                },
            );
        }

        for d in &self.params.trip {
            let t = r.train(&d.train, "trip window")?;
            let from = r.platform(&d.from, "trip window")?;
            let to = r.platform(&d.to, "trip window")?;
            params.trip.insert((t, from, to), Window::new(d.lo, d.hi));
        }
        for (doc, map, kind) in [
            (&self.params.dwell, &mut params.dwell, "dwell window"),
            (&self.params.accel, &mut params.accel, "acceleration window"),
            (&self.params.brake, &mut params.brake, "braking window"),
        ] {
            for d in doc {
                let t = r.train(&d.train, kind)?;
                let p = r.platform(&d.platform, kind)?;
                map.insert((t, p), Window::new(d.lo, d.hi));
            }
        }
        for d in &self.params.travel {
            let t = r.train(&d.train, "travel window")?;
            params.travel.insert(t, Window::new(d.lo, d.hi));
        }

        let network = RailNetwork {
            stations: self
                .stations
                .iter()
                .map(|id| Station { id: id.clone() })
                .collect(),
            lines: line_list,
            platforms: platform_list,
            tracks,
            crossing_overs,
            trains: train_list,
            opposite_pairs,
            connections,
            turnarounds,
            headways,
        };

        // Initial timetable: exactly one event per platform call.
        let mut initial = Timetable::zeroed(&network);
        let mut filled: HashMap<(TrainIdx, PlatformIdx), bool> = HashMap::new();
        for e in &self.initial_timetable {
            let t = r.train(&e.train, "initial timetable")?;
            let p = r.platform(&e.platform, "initial timetable")?;
            let pos = network.trains[t.index()]
                .position_of(p)
                .ok_or_else(|| Error::UnknownId {
                    kind: "platform",
                    id: e.platform.clone(),
                    context: format!("initial timetable: not on the path of train {}", e.train),
                })?;
            if filled.insert((t, p), true).is_some() {
                return Err(Error::DuplicateEvent {
                    train: e.train.clone(),
                    platform: e.platform.clone(),
                });
            }
            initial.set_position(
                t,
                pos,
                EventTimes {
                    arrival: e.arrival,
                    departure: e.departure,
                },
            );
        }
        for (ti, train) in network.trains.iter().enumerate() {
            for &p in &train.path {
                if !filled.contains_key(&(TrainIdx(ti as u32), p)) {
                    return Err(Error::MissingEvent {
                        train: train.id.clone(),
                        platform: network.platform_id(p).to_string(),
                    });
                }
            }
        }

        Ok(Instance {
            network,
            params,
            initial,
        })
    }
}

impl Instance {
    pub fn from_file(path: &Path) -> Result<Instance> {
        InstanceDoc::read_json(path)?.load()
    }

    /// Rebuilds the document form, with map-backed windows written in their
    /// canonical (sorted) order.
    pub fn to_doc(&self) -> InstanceDoc {
        let net = &self.network;
        let pid = |p: PlatformIdx| net.platform_id(p).to_string();
        let tid = |t: TrainIdx| net.train_id(t).to_string();

        let coupling_doc = |c: &Coupling, w: Window| CouplingDoc {
            i: pid(c.i),
            j: pid(c.j),
            t: tid(c.t),
            t_prime: tid(c.t_next),
            lo: w.lo,
            hi: w.hi,
        };

        InstanceDoc {
            stations: net.stations.iter().map(|s| s.id.clone()).collect(),
            platforms: net
                .platforms
                .iter()
                .map(|p| PlatformDoc {
                    id: p.id.clone(),
                    station: net.stations[p.station.index()].id.clone(),
                    line: net.lines[p.line.index()].id.clone(),
                })
                .collect(),
            tracks: net
                .tracks
                .iter()
                .map(|t| EdgeDoc {
                    from: pid(t.from),
                    to: pid(t.to),
                })
                .collect(),
            crossing_overs: net
                .crossing_overs
                .iter()
                .map(|c| EdgeDoc {
                    from: pid(c.from),
                    to: pid(c.to),
                })
                .collect(),
            trains: net
                .trains
                .iter()
                .map(|t| TrainDoc {
                    id: t.id.clone(),
                    path: t.path.iter().map(|&p| pid(p)).collect(),
                })
                .collect(),
            omega: net
                .opposite_pairs
                .iter()
                .map(|&(i, j)| OppositeDoc { i: pid(i), j: pid(j) })
                .collect(),
            connections: net
                .connections
                .iter()
                .map(|c| coupling_doc(c, self.params.connection[c]))
                .collect(),
            turnarounds: net
                .turnarounds
                .iter()
                .map(|c| coupling_doc(c, self.params.turnaround[c]))
                .collect(),
            headways: net
                .headways
                .iter()
                .map(|c| {
                    let g = self.params.headway[c];
                    HeadwayDoc {
                        i: pid(c.i),
                        j: pid(c.j),
                        t: tid(c.t),
                        t_prime: tid(c.t_next),
                        h_i: g.at_from,
                        h_j: g.at_to,
                    }
                })
                .collect(),
            params: ParamsDoc {
                r: self.params.r,
                epsilon: self.params.epsilon,
                deviation: self.params.deviation,
                trip: self
                    .params
                    .trip
                    .iter()
                    .map(|(&(t, from, to), w)| TripDoc {
                        train: tid(t),
                        from: pid(from),
                        to: pid(to),
                        lo: w.lo,
                        hi: w.hi,
                    })
                    .collect(),
                dwell: call_docs(&self.params.dwell, net),
                accel: call_docs(&self.params.accel, net),
                brake: call_docs(&self.params.brake, net),
                travel: self
                    .params
                    .travel
                    .iter()
                    .map(|(&t, w)| TravelDoc {
                        train: tid(t),
                        lo: w.lo,
                        hi: w.hi,
                    })
                    .collect(),
            },
            initial_timetable: net
                .trains
                .iter()
                .enumerate()
                .flat_map(|(ti, train)| {
                    let t = TrainIdx(ti as u32);
                    train.path.iter().enumerate().map(move |(pos, &p)| {
                        let e = self.initial.at_position(t, pos);
                        EventDoc {
                            train: train.id.clone(),
                            platform: pid(p),
                            arrival: e.arrival,
                            departure: e.departure,
                        }
                    })
                })
                .collect(),
        }
    }
}

fn call_docs(
    map: &std::collections::BTreeMap<(TrainIdx, PlatformIdx), Window>,
    net: &RailNetwork,
) -> Vec<CallDoc> {
    map.iter()
        .map(|(&(t, p), w)| CallDoc {
            train: net.train_id(t).to_string(),
            platform: net.platform_id(p).to_string(),
            lo: w.lo,
            hi: w.hi,
        })
        .collect()
}
