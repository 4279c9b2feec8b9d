//! JSON formats for networks, demands and schedules.
//!
//! Minutes at the boundary, ticks inside. Values that do not sit on the
//! 1/1000-minute grid are rejected; emitted minutes always carry three
//! decimals.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::model::{Demand, DemandId, Journey, Network, Schedule};
use crate::time::{format_minutes, minutes_to_ticks, Duration, TimePoint};

/// A tick count that crosses the JSON boundary as minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Minutes(pub i64);

impl Serialize for Minutes {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let raw =
            RawValue::from_string(format_minutes(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Minutes {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        minutes_to_ticks(v)
            .map(Minutes)
            .map_err(serde::de::Error::custom)
    }
}

impl From<TimePoint> for Minutes {
    fn from(t: TimePoint) -> Self {
        Minutes(t.0)
    }
}

impl From<Duration> for Minutes {
    fn from(d: Duration) -> Self {
        Minutes(d.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u32>,
    #[serde(default = "zero_minutes")]
    pub service_time_min: Minutes,
}

fn zero_minutes() -> Minutes {
    Minutes(0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub tmin_min: Minutes,
    pub tmax_min: Minutes,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSpec {
    pub id: String,
    pub edges: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
    pub routes: Vec<RouteSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSpec {
    pub id: u64,
    pub route: String,
    pub deadline_min: Minutes,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub release_min: Option<Minutes>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandFile {
    pub demands: Vec<DemandSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub demand: u64,
    pub departure_min: Minutes,
    /// 1-based spot per landing node.
    #[serde(default)]
    pub spots: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub entries: Vec<ScheduleEntry>,
    pub sod_min: Minutes,
    pub lower_bound_min: Minutes,
    pub complete: bool,
}

/// Deserializes with a JSON path in the error message.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Json(format!("at `{}`: {}", e.path(), e.inner())))
}

impl NetworkFile {
    pub fn build(&self) -> Result<Network> {
        let mut b = Network::builder();
        for n in &self.nodes {
            b = b.node(&n.id, n.capacity, Duration(n.service_time_min.0));
        }
        for e in &self.edges {
            b = b.edge(
                &e.id,
                &e.tail,
                &e.head,
                Duration(e.tmin_min.0),
                Duration(e.tmax_min.0),
            );
        }
        for r in &self.routes {
            let edges: Vec<&str> = r.edges.iter().map(String::as_str).collect();
            b = b.route(&r.id, &edges);
        }
        b.build()
    }

    pub fn from_network(net: &Network) -> Self {
        NetworkFile {
            nodes: net
                .nodes()
                .iter()
                .map(|n| NodeSpec {
                    id: n.name.clone(),
                    capacity: n.capacity,
                    service_time_min: n.service_time.into(),
                })
                .collect(),
            edges: net
                .edges()
                .iter()
                .map(|e| EdgeSpec {
                    id: e.name.clone(),
                    tail: net.node(e.tail).name.clone(),
                    head: net.node(e.head).name.clone(),
                    tmin_min: e.min_time.into(),
                    tmax_min: e.max_time.into(),
                })
                .collect(),
            routes: net
                .routes()
                .iter()
                .map(|r| RouteSpec {
                    id: r.name.clone(),
                    edges: r
                        .edges()
                        .iter()
                        .map(|&e| net.edge(e).name.clone())
                        .collect(),
                })
                .collect(),
        }
    }
}

pub fn parse_network(text: &str) -> Result<Network> {
    from_json::<NetworkFile>(text)?.build()
}

impl DemandFile {
    pub fn build(&self, net: &Network) -> Result<Vec<Demand>> {
        let mut seen = std::collections::HashSet::new();
        self.demands
            .iter()
            .map(|d| {
                if !seen.insert(d.id) {
                    return Err(Error::Duplicate {
                        kind: "demand",
                        id: d.id.to_string(),
                    });
                }
                Ok(Demand {
                    id: DemandId(d.id),
                    route: net.route_id(&d.route)?,
                    deadline: TimePoint(d.deadline_min.0),
                    release: d
                        .release_min
                        .map(|m| TimePoint(m.0))
                        .unwrap_or(TimePoint::NEG_INF),
                })
            })
            .collect()
    }

    pub fn from_demands(net: &Network, demands: &[Demand]) -> Self {
        DemandFile {
            demands: demands
                .iter()
                .map(|d| DemandSpec {
                    id: d.id.0,
                    route: net.route(d.route).name.clone(),
                    deadline_min: d.deadline.into(),
                    release_min: d.release.is_finite().then(|| d.release.into()),
                })
                .collect(),
        }
    }
}

pub fn parse_demands(text: &str, net: &Network) -> Result<Vec<Demand>> {
    from_json::<DemandFile>(text)?.build(net)
}

impl ScheduleFile {
    pub fn from_schedule(
        net: &Network,
        schedule: &Schedule,
        lower_bound: Duration,
        complete: bool,
    ) -> Self {
        let entries = schedule
            .journeys()
            .map(|j| {
                let route = net.route(j.route);
                let spots = (1..=route.len())
                    .filter_map(|p| {
                        j.spot(p)
                            .map(|s| (net.node(route.node(p)).name.clone(), s + 1))
                    })
                    .collect();
                ScheduleEntry {
                    demand: j.demand.0,
                    departure_min: j.departure.into(),
                    spots,
                }
            })
            .collect();
        ScheduleFile {
            entries,
            sod_min: crate::model::sod_cost(schedule).into(),
            lower_bound_min: lower_bound.into(),
            complete,
        }
    }

    /// Rebuilds journeys for the listed demands.
    pub fn to_schedule(&self, net: &Network, demands: &[Demand]) -> Result<Schedule> {
        let by_id: BTreeMap<u64, &Demand> = demands.iter().map(|d| (d.id.0, d)).collect();
        let mut schedule = Schedule::new();
        for e in &self.entries {
            let demand = by_id.get(&e.demand).ok_or(Error::UnknownDemand(e.demand))?;
            let mut j = Journey::new(demand, TimePoint(e.departure_min.0));
            if !e.spots.is_empty() {
                let route = net.route(demand.route);
                j.spots = (1..=route.len())
                    .map(|p| {
                        let name = &net.node(route.node(p)).name;
                        e.spots
                            .get(name)
                            .and_then(|s| s.checked_sub(1))
                            .ok_or_else(|| {
                                Error::Invalid(format!(
                                    "demand {}: no spot for node `{name}`",
                                    e.demand
                                ))
                            })
                    })
                    .collect::<Result<_>>()?;
            }
            schedule.insert(j);
        }
        Ok(schedule)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }
}
