//! Cumulative departure and arrival counts over time windows.

use std::collections::BTreeSet;

use super::lp::{ratio, Q};
use crate::error::{Error, Result};
use crate::model::{current_interval, DemandId, Journey, Network, NodeId, RouteId};
use crate::time::{Interval, TimePoint, TICKS_PER_MINUTE};

#[derive(Debug, Clone, PartialEq)]
pub struct CounterQuery {
    pub from: TimePoint,
    pub to: TimePoint,
    pub node: NodeId,
    pub route: Option<RouteId>,
    pub demands: Option<BTreeSet<DemandId>>,
}

impl CounterQuery {
    pub fn new(node: NodeId, from: TimePoint, to: TimePoint) -> Self {
        CounterQuery {
            from,
            to,
            node,
            route: None,
            demands: None,
        }
    }

    pub fn on_route(mut self, route: RouteId) -> Self {
        self.route = Some(route);
        self
    }

    pub fn among(mut self, demands: impl IntoIterator<Item = DemandId>) -> Self {
        self.demands = Some(demands.into_iter().collect());
        self
    }

    fn selects(&self, j: &Journey) -> bool {
        self.route.is_none_or(|r| r == j.route)
            && self.demands.as_ref().is_none_or(|s| s.contains(&j.demand))
    }
}

/// Departure of `j` from `node` when known: the scheduled departure at the
/// origin, `arrival + service` at a reached node.
fn known_departure(net: &Network, j: &Journey, node: NodeId) -> Option<TimePoint> {
    let route = net.route(j.route);
    let p = route.position_of(node)?;
    if p == route.len() {
        return None;
    }
    if p == 0 {
        Some(j.departure)
    } else {
        j.arrival(p).map(|a| a + route.service(p))
    }
}

/// Vehicles leaving the node within the closed window.
pub fn cumulative_departures<'a>(
    net: &Network,
    journeys: impl IntoIterator<Item = &'a Journey>,
    query: &CounterQuery,
) -> usize {
    journeys
        .into_iter()
        .filter(|j| query.selects(j))
        .filter_map(|j| known_departure(net, j, query.node))
        .filter(|&t| query.from <= t && t <= query.to)
        .count()
}

/// Vehicles whose whole blocking window at the node lies in the closed window.
pub fn cumulative_arrivals<'a>(
    net: &Network,
    journeys: impl IntoIterator<Item = &'a Journey>,
    query: &CounterQuery,
) -> usize {
    let window = Interval::new(query.from, query.to);
    journeys
        .into_iter()
        .filter(|j| query.selects(j))
        .filter(|j| {
            let route = net.route(j.route);
            match route.position_of(query.node) {
                Some(p) if p >= 1 => window.contains(&current_interval(net, j, p)),
                _ => false,
            }
        })
        .count()
}

/// Departures per minute over the window.
pub fn flow_rate<'a>(
    net: &Network,
    journeys: impl IntoIterator<Item = &'a Journey>,
    query: &CounterQuery,
) -> Result<Q> {
    let len = (query.to - query.from).0;
    if len <= 0 {
        return Err(Error::EmptyWindow);
    }
    let count = cumulative_departures(net, journeys, query) as i64;
    Ok(ratio(count * TICKS_PER_MINUTE, len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::model::{Demand, Schedule};

    fn t(m: i64) -> TimePoint {
        TimePoint::minutes(m)
    }

    fn example_schedule(net: &Network) -> Schedule {
        let r = net.route_id("R").unwrap();
        let mut j1 = Journey::new(&Demand::new(1, r, t(8)), t(0));
        j1.record_arrival(net, t(2)).unwrap();
        let j2 = Journey::new(&Demand::new(2, r, t(11)), t(3));
        [j1, j2].into_iter().collect()
    }

    #[test]
    fn counts_on_two_link() {
        let net = cases::two_link();
        let s = example_schedule(&net);
        let v1 = net.node_id("v1").unwrap();
        let v3 = net.node_id("v3").unwrap();
        assert_eq!(
            cumulative_departures(&net, s.journeys(), &CounterQuery::new(v1, t(0), t(3))),
            2
        );
        assert_eq!(
            cumulative_arrivals(&net, s.journeys(), &CounterQuery::new(v3, t(0), t(12))),
            2
        );
        assert_eq!(
            cumulative_arrivals(&net, s.journeys(), &CounterQuery::new(v3, t(0), t(11))),
            1
        );
        assert_eq!(
            cumulative_departures(&net, [], &CounterQuery::new(v1, t(0), t(3))),
            0
        );
        let only_two = CounterQuery::new(v1, t(0), t(3)).among([DemandId(2)]);
        assert_eq!(cumulative_departures(&net, s.journeys(), &only_two), 1);
    }

    #[test]
    fn rates() {
        let net = cases::two_link();
        let s = example_schedule(&net);
        let v1 = net.node_id("v1").unwrap();
        assert_eq!(
            flow_rate(&net, s.journeys(), &CounterQuery::new(v1, t(0), t(4))).unwrap(),
            ratio(1, 2)
        );
        assert_eq!(
            flow_rate(&net, s.journeys(), &CounterQuery::new(v1, t(0), t(10))).unwrap(),
            ratio(1, 5)
        );
        assert_eq!(
            flow_rate(&net, s.journeys(), &CounterQuery::new(v1, t(20), t(30))).unwrap(),
            ratio(0, 1)
        );
        assert_eq!(
            flow_rate(&net, s.journeys(), &CounterQuery::new(v1, t(4), t(4))),
            Err(Error::EmptyWindow)
        );
    }
}
