use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::network::{Network, NodeId, RouteId};
use crate::error::{Error, Result};
use crate::time::TimePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DemandId(pub u64);

impl fmt::Display for DemandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A trip request: fly `route`, land at its destination no later than `deadline`.
#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    pub id: DemandId,
    pub route: RouteId,
    pub deadline: TimePoint,
    /// When the demand becomes known to the scheduler. `TimePoint::NEG_INF`
    /// for demands available from the start.
    pub release: TimePoint,
}

impl Demand {
    pub fn new(id: u64, route: RouteId, deadline: TimePoint) -> Self {
        Demand {
            id: DemandId(id),
            route,
            deadline,
            release: TimePoint::NEG_INF,
        }
    }

    pub fn released_at(mut self, release: TimePoint) -> Self {
        self.release = release;
        self
    }

    /// Latest departure that still meets the deadline under worst-case travel.
    pub fn latest_departure(&self, network: &Network) -> TimePoint {
        self.deadline - network.route(self.route).max_total()
    }

    /// True when the deadline is reachable from `now` under worst-case travel.
    pub fn reachable_from(&self, network: &Network, now: TimePoint) -> bool {
        self.latest_departure(network) >= now
    }
}

/// A scheduled demand: the committed departure, the parking spot held at each
/// landing node and the arrivals realized so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Journey {
    pub demand: DemandId,
    pub route: RouteId,
    pub deadline: TimePoint,
    pub departure: TimePoint,
    /// Realized arrival times for route positions `1..=arrivals.len()`.
    /// Positions past the end have not been reached yet.
    pub arrivals: Vec<TimePoint>,
    /// Spot index (0-based) for route positions `1..=route.len()`. Empty when
    /// spots have not been assigned.
    pub spots: Vec<u32>,
}

impl Journey {
    pub fn new(demand: &Demand, departure: TimePoint) -> Self {
        Journey {
            demand: demand.id,
            route: demand.route,
            deadline: demand.deadline,
            departure,
            arrivals: Vec::new(),
            spots: Vec::new(),
        }
    }

    /// Last route position with a realized arrival (0 when none).
    pub fn last_reached(&self) -> usize {
        self.arrivals.len()
    }

    pub fn arrival(&self, position: usize) -> Option<TimePoint> {
        if position == 0 {
            None
        } else {
            self.arrivals.get(position - 1).copied()
        }
    }

    pub fn arrival_at(&self, network: &Network, node: NodeId) -> Option<TimePoint> {
        network
            .route(self.route)
            .position_of(node)
            .and_then(|p| self.arrival(p))
    }

    pub fn spot(&self, position: usize) -> Option<u32> {
        if position == 0 {
            None
        } else {
            self.spots.get(position - 1).copied()
        }
    }

    pub fn spot_at(&self, network: &Network, node: NodeId) -> Option<u32> {
        network
            .route(self.route)
            .position_of(node)
            .and_then(|p| self.spot(p))
    }

    /// Records a landing at the next route position.
    pub fn record_arrival(&mut self, network: &Network, at: TimePoint) -> Result<usize> {
        let route = network.route(self.route);
        let position = self.arrivals.len() + 1;
        if position > route.len() {
            return Err(Error::PositionOutOfRange {
                position,
                len: route.len(),
            });
        }
        let earliest = if position == 1 {
            self.departure
        } else {
            self.arrivals[position - 2] + route.service(position - 1)
        };
        if at < earliest {
            return Err(Error::NonMonotoneArrivals(self.demand.0));
        }
        self.arrivals.push(at);
        Ok(position)
    }

    pub fn is_complete(&self, network: &Network) -> bool {
        self.arrivals.len() == network.route(self.route).len()
    }
}

/// A set of committed journeys keyed by demand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Schedule {
    journeys: BTreeMap<DemandId, Journey>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.journeys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.journeys.is_empty()
    }

    pub fn insert(&mut self, journey: Journey) {
        self.journeys.insert(journey.demand, journey);
    }

    pub fn get(&self, id: DemandId) -> Option<&Journey> {
        self.journeys.get(&id)
    }

    pub fn get_mut(&mut self, id: DemandId) -> Option<&mut Journey> {
        self.journeys.get_mut(&id)
    }

    pub fn contains(&self, id: DemandId) -> bool {
        self.journeys.contains_key(&id)
    }

    pub fn journeys(&self) -> impl Iterator<Item = &Journey> {
        self.journeys.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = DemandId> + '_ {
        self.journeys.keys().copied()
    }

    /// Departures only, for commitment checks.
    pub fn departures(&self) -> BTreeMap<DemandId, TimePoint> {
        self.journeys
            .iter()
            .map(|(&id, j)| (id, j.departure))
            .collect()
    }
}

impl FromIterator<Journey> for Schedule {
    fn from_iter<I: IntoIterator<Item = Journey>>(iter: I) -> Self {
        let mut s = Schedule::new();
        for j in iter {
            s.insert(j);
        }
        s
    }
}
