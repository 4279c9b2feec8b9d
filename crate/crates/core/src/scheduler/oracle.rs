//! Exact reference solver for small instances.
//!
//! Departures are the greatest solution of a system of difference
//! constraints: `delta_j <= latest_j`, plus `delta_a + hi_a <= delta_b + lo_b`
//! for every ordered pair fixed so far. Whenever more than `C` windows share
//! an instant at a node, some pair among them must be separated, so the
//! search branches on every ordering of every such pair.

use std::collections::HashSet;

use super::prepare::{assign_spots, SpotRequest};
use super::table::BlockTable;
use crate::error::{Error, Result};
use crate::model::{Demand, Journey, Network, NodeId, Schedule};
use crate::time::{Duration, TimePoint};

pub const ORACLE_MAX_DEMANDS: usize = 6;

struct Instance {
    latest: Vec<i64>,
    deadline: Vec<i64>,
    /// Per demand: (node, lo, hi) offsets from the departure.
    legs: Vec<Vec<(NodeId, i64, i64)>>,
    capacity: Vec<(NodeId, usize)>,
    floor: i64,
}

/// `delta[a] <= delta[b] + gap`.
type Edge = (usize, usize, i64);

impl Instance {
    fn greatest(&self, edges: &[Edge]) -> Option<Vec<i64>> {
        let n = self.latest.len();
        let mut d = self.latest.clone();
        for round in 0..=n {
            let mut changed = false;
            for &(a, b, gap) in edges {
                if d[b] + gap < d[a] {
                    d[a] = d[b] + gap;
                    changed = true;
                }
            }
            if !changed {
                return d.iter().all(|&x| x >= self.floor).then_some(d);
            }
            if round == n {
                return None;
            }
        }
        None
    }

    /// Demands covering the first over-capacity instant, if any.
    fn conflict(&self, d: &[i64]) -> Option<Vec<(usize, NodeId)>> {
        for &(v, cap) in &self.capacity {
            let windows: Vec<(usize, i64, i64)> = self
                .legs
                .iter()
                .enumerate()
                .filter_map(|(j, legs)| {
                    legs.iter()
                        .find(|l| l.0 == v)
                        .map(|&(_, lo, hi)| (j, d[j] + lo, d[j] + hi))
                })
                .filter(|&(_, lo, hi)| lo < hi)
                .collect();
            let mut starts: Vec<i64> = windows.iter().map(|w| w.1).collect();
            starts.sort_unstable();
            for t in starts {
                let covering: Vec<(usize, NodeId)> = windows
                    .iter()
                    .filter(|w| w.1 <= t && t < w.2)
                    .map(|w| (w.0, v))
                    .collect();
                if covering.len() > cap {
                    return Some(covering);
                }
            }
        }
        None
    }

    fn cost(&self, d: &[i64]) -> i64 {
        self.deadline.iter().zip(d).map(|(f, x)| f - x).sum()
    }

    fn offsets(&self, j: usize, v: NodeId) -> (i64, i64) {
        let &(_, lo, hi) = self.legs[j].iter().find(|l| l.0 == v).expect("leg at node");
        (lo, hi)
    }

    fn search(
        &self,
        edges: &mut Vec<Edge>,
        seen: &mut HashSet<Vec<Edge>>,
        best: &mut Option<(i64, Vec<i64>)>,
    ) {
        let mut key = edges.clone();
        key.sort_unstable();
        if !seen.insert(key) {
            return;
        }
        let Some(d) = self.greatest(edges) else {
            return;
        };
        let cost = self.cost(&d);
        if best.as_ref().is_some_and(|(b, _)| cost >= *b) {
            return;
        }
        let Some(covering) = self.conflict(&d) else {
            *best = Some((cost, d));
            return;
        };
        for &(a, v) in &covering {
            for &(b, _) in &covering {
                if a == b {
                    continue;
                }
                let (_, hi_a) = self.offsets(a, v);
                let (lo_b, _) = self.offsets(b, v);
                edges.push((a, b, lo_b - hi_a));
                self.search(edges, seen, best);
                edges.pop();
            }
        }
    }
}

/// Minimum-SoD schedule departing no earlier than `floor`, or `None` when
/// no schedule exists. At most [`ORACLE_MAX_DEMANDS`] demands.
pub fn oracle_optimal(
    net: &Network,
    demands: &[Demand],
    floor: TimePoint,
) -> Result<Option<(Schedule, Duration)>> {
    if demands.len() > ORACLE_MAX_DEMANDS {
        return Err(Error::InstanceTooLarge {
            max: ORACLE_MAX_DEMANDS,
            got: demands.len(),
        });
    }
    let mut capacity: Vec<(NodeId, usize)> = Vec::new();
    let legs: Vec<Vec<(NodeId, i64, i64)>> = demands
        .iter()
        .map(|d| {
            let route = net.route(d.route);
            (1..=route.len())
                .map(|p| {
                    let v = route.node(p);
                    if !capacity.iter().any(|c| c.0 == v) {
                        capacity.push((v, net.capacity(v) as usize));
                    }
                    (
                        v,
                        route.min_reach(p).0,
                        (route.max_reach(p) + route.service(p)).0,
                    )
                })
                .collect()
        })
        .collect();
    let inst = Instance {
        latest: demands.iter().map(|d| d.latest_departure(net).0).collect(),
        deadline: demands.iter().map(|d| d.deadline.0).collect(),
        legs,
        capacity,
        floor: floor.0,
    };
    let mut best = None;
    inst.search(&mut Vec::new(), &mut HashSet::new(), &mut best);
    let Some((cost, d)) = best else {
        return Ok(None);
    };
    let requests: Vec<SpotRequest> = demands
        .iter()
        .zip(&d)
        .map(|(dm, &x)| SpotRequest::for_departure(net, dm, TimePoint(x)))
        .collect();
    let spots = assign_spots(&requests, &BlockTable::new(net))?;
    let schedule = demands
        .iter()
        .zip(&d)
        .zip(spots)
        .map(|((dm, &x), s)| {
            let mut j = Journey::new(dm, TimePoint(x));
            j.spots = s;
            j
        })
        .collect();
    Ok(Some((schedule, Duration(cost))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::model::{audit_schedule, DemandId, Information};

    fn t(m: i64) -> TimePoint {
        TimePoint::minutes(m)
    }

    #[test]
    fn example_pair() {
        let net = cases::two_link();
        let demands = cases::two_link_demands(&net);
        assert!(oracle_optimal(&net, &demands, t(0)).unwrap().is_none());
        let (s, cost) = oracle_optimal(&net, &demands, TimePoint::NEG_INF)
            .unwrap()
            .unwrap();
        assert_eq!(s.get(DemandId(1)).unwrap().departure, t(-2));
        assert_eq!(s.get(DemandId(2)).unwrap().departure, t(3));
        assert_eq!(cost, Duration::minutes(18));
        assert!(audit_schedule(&s, &net, Information::WorstCase).is_clean());
    }

    #[test]
    fn single_demand_costs_route_time() {
        let net = cases::fig3();
        let r = net.route_id("R4").unwrap();
        let d = Demand::new(1, r, t(500));
        let (_, cost) = oracle_optimal(&net, &[d], t(0)).unwrap().unwrap();
        assert_eq!(cost, net.route(r).max_total());
    }

    #[test]
    fn too_large() {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let demands: Vec<Demand> = (1..=7)
            .map(|i| Demand::new(i, r, t(10 * i as i64)))
            .collect();
        assert_eq!(
            oracle_optimal(&net, &demands, t(0)).unwrap_err(),
            Error::InstanceTooLarge { max: 6, got: 7 }
        );
    }
}
