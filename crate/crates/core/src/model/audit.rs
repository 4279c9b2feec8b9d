use std::collections::BTreeMap;
use std::fmt;

use super::demand::{DemandId, Schedule};
use super::formulas::{current_interval, current_latest_arrival, static_intervals};
use super::network::{Network, NodeId};
use crate::time::{Interval, TimePoint};

/// Which arrival information the audit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Information {
    /// Ignore realized arrivals: windows are projected from the departure.
    WorstCase,
    /// Use realized arrivals where present.
    Realized,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DeadlineMiss {
        demand: DemandId,
        latest_arrival: TimePoint,
        deadline: TimePoint,
    },
    CapacityExceeded {
        node: NodeId,
        at: TimePoint,
        count: u32,
        capacity: u32,
    },
    SpotOverlap {
        node: NodeId,
        spot: u32,
        first: DemandId,
        second: DemandId,
    },
    SpotOutOfRange {
        node: NodeId,
        demand: DemandId,
        spot: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DeadlineMiss {
                demand,
                latest_arrival,
                deadline,
            } => {
                write!(
                    f,
                    "demand {demand} may land at {latest_arrival} after its deadline {deadline}"
                )
            }
            Violation::CapacityExceeded {
                node,
                at,
                count,
                capacity,
            } => {
                write!(
                    f,
                    "node #{} holds {count} vehicles at {at} (capacity {capacity})",
                    node.0
                )
            }
            Violation::SpotOverlap {
                node,
                spot,
                first,
                second,
            } => write!(
                f,
                "node #{} spot {}: demands {first} and {second} overlap",
                node.0,
                spot + 1
            ),
            Violation::SpotOutOfRange { node, demand, spot } => {
                write!(
                    f,
                    "demand {demand} assigned spot {} at node #{}",
                    spot + 1,
                    node.0
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// An occupancy window with its owner and (optional) spot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occupancy {
    pub demand: DemandId,
    pub interval: Interval,
    pub spot: Option<u32>,
}

/// Sweep over endpoints with half-open semantics. Returns the first instant of
/// every maximal stretch where more than `capacity` windows are active.
pub fn capacity_excess(windows: &[Interval], capacity: u32) -> Vec<(TimePoint, u32)> {
    let mut events: Vec<(TimePoint, i32)> = Vec::with_capacity(windows.len() * 2);
    for w in windows.iter().filter(|w| !w.is_empty()) {
        events.push((w.lo, 1));
        events.push((w.hi, -1));
    }
    // ends before starts at equal instants
    events.sort();
    let mut out = Vec::new();
    let mut count: i64 = 0;
    let mut in_excess = false;
    let mut i = 0;
    while i < events.len() {
        let t = events[i].0;
        while i < events.len() && events[i].0 == t {
            count += events[i].1 as i64;
            i += 1;
        }
        if count > capacity as i64 {
            if !in_excess {
                out.push((t, count as u32));
                in_excess = true;
            }
        } else {
            in_excess = false;
        }
    }
    out
}

/// Checks per-node counts and per-spot exclusivity for a set of windows at one node.
pub fn audit_node(node: NodeId, capacity: u32, occupancy: &[Occupancy], out: &mut Vec<Violation>) {
    let windows: Vec<Interval> = occupancy.iter().map(|o| o.interval).collect();
    for (at, count) in capacity_excess(&windows, capacity) {
        out.push(Violation::CapacityExceeded {
            node,
            at,
            count,
            capacity,
        });
    }
    let mut by_spot: BTreeMap<u32, Vec<&Occupancy>> = BTreeMap::new();
    for o in occupancy {
        if let Some(spot) = o.spot {
            if spot >= capacity {
                out.push(Violation::SpotOutOfRange {
                    node,
                    demand: o.demand,
                    spot,
                });
            }
            by_spot.entry(spot).or_default().push(o);
        }
    }
    for (spot, mut list) in by_spot {
        list.retain(|o| !o.interval.is_empty());
        list.sort_by_key(|o| (o.interval.lo, o.interval.hi, o.demand));
        // latest end seen so far on this spot
        let mut holder: Option<&Occupancy> = None;
        for o in list {
            if let Some(h) = holder {
                if h.interval.overlaps(&o.interval) {
                    out.push(Violation::SpotOverlap {
                        node,
                        spot,
                        first: h.demand,
                        second: o.demand,
                    });
                }
                if o.interval.hi > h.interval.hi {
                    holder = Some(o);
                }
            } else {
                holder = Some(o);
            }
        }
    }
}

/// Collects occupancy windows per node for every journey in `schedule`.
pub fn occupancy_by_node(
    schedule: &Schedule,
    network: &Network,
    info: Information,
) -> BTreeMap<NodeId, Vec<Occupancy>> {
    let mut per_node: BTreeMap<NodeId, Vec<Occupancy>> = BTreeMap::new();
    for j in schedule.journeys() {
        let route = network.route(j.route);
        let windows = match info {
            Information::WorstCase => static_intervals(route, j.departure),
            Information::Realized => (1..=route.len())
                .map(|p| current_interval(network, j, p))
                .collect(),
        };
        for (i, w) in windows.into_iter().enumerate() {
            let p = i + 1;
            per_node.entry(route.node(p)).or_default().push(Occupancy {
                demand: j.demand,
                interval: w,
                spot: j.spot(p),
            });
        }
    }
    per_node
}

/// Checks the deadline and capacity properties of a schedule: every demand's
/// latest landing meets its deadline, no node ever holds more vehicles than
/// it has spots, and assigned spots are never double-booked.
pub fn audit_schedule(schedule: &Schedule, network: &Network, info: Information) -> AuditReport {
    let mut violations = Vec::new();
    for j in schedule.journeys() {
        let latest = match info {
            Information::WorstCase => j.departure + network.route(j.route).max_total(),
            Information::Realized => current_latest_arrival(network, j),
        };
        if latest > j.deadline {
            violations.push(Violation::DeadlineMiss {
                demand: j.demand,
                latest_arrival: latest,
                deadline: j.deadline,
            });
        }
    }
    for (node, occ) in occupancy_by_node(schedule, network, info) {
        audit_node(node, network.capacity(node), &occ, &mut violations);
    }
    AuditReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::model::demand::{Demand, Journey};
    use proptest::prelude::*;

    fn t(m: i64) -> TimePoint {
        TimePoint::minutes(m)
    }

    #[test]
    fn dynamic_two_link_schedule_is_clean() {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let d1 = Demand::new(1, r, t(8));
        let d2 = Demand::new(2, r, t(11));
        let mut j1 = Journey::new(&d1, t(0));
        j1.record_arrival(&net, t(2)).unwrap();
        let j2 = Journey::new(&d2, t(3));
        let s: Schedule = [j1, j2].into_iter().collect();
        assert!(audit_schedule(&s, &net, Information::Realized).is_clean());
        // the same departures are not safe without the realized landing
        assert!(!audit_schedule(&s, &net, Information::WorstCase).is_clean());
    }

    #[test]
    fn simultaneous_departures_overload_v2() {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let s: Schedule = [
            Journey::new(&Demand::new(1, r, t(8)), t(0)),
            Journey::new(&Demand::new(2, r, t(11)), t(0)),
        ]
        .into_iter()
        .collect();
        let report = audit_schedule(&s, &net, Information::WorstCase);
        let v2 = net.node_id("v2").unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::CapacityExceeded { node, .. } if *node == v2)));
    }

    #[test]
    fn single_demand_at_latest_departure_is_clean() {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let d = Demand::new(1, r, t(20));
        let s: Schedule = [Journey::new(&d, d.latest_departure(&net))]
            .into_iter()
            .collect();
        assert!(audit_schedule(&s, &net, Information::WorstCase).is_clean());
    }

    #[test]
    fn spot_overlap_detected_even_when_count_is_fine() {
        let node = NodeId(0);
        let occ = [
            Occupancy {
                demand: DemandId(1),
                interval: Interval::new(t(0), t(5)),
                spot: Some(0),
            },
            Occupancy {
                demand: DemandId(2),
                interval: Interval::new(t(4), t(6)),
                spot: Some(0),
            },
        ];
        let mut out = Vec::new();
        audit_node(node, 2, &occ, &mut out);
        assert_eq!(out.len(), 1);
        assert!(matches!(out[0], Violation::SpotOverlap { .. }));
    }

    fn brute_force_excess(windows: &[Interval], capacity: u32, horizon: i64) -> bool {
        (0..horizon).any(|tick| {
            windows.iter().filter(|w| w.covers(TimePoint(tick))).count() as u32 > capacity
        })
    }

    proptest! {
        #[test]
        fn sweep_agrees_with_per_tick_count(
            raw in prop::collection::vec((0i64..9_000, 0i64..1_000), 0..12),
            capacity in 0u32..4,
        ) {
            let windows: Vec<Interval> = raw
                .iter()
                .map(|&(lo, len)| Interval::new(TimePoint(lo), TimePoint(lo + len)))
                .collect();
            let sweep = !capacity_excess(&windows, capacity).is_empty();
            prop_assert_eq!(sweep, brute_force_excess(&windows, capacity, 10_000));
        }
    }
}
