//! Per-journey timing: latest arrivals, blocking windows, spans, travel bounds
//! and the SoD objective.

use super::demand::{Demand, Journey, Schedule};
use super::network::{Network, NodeId, Route};
use crate::error::{Error, Result};
use crate::time::{Duration, Interval, TimePoint};

/// Departure time from route position `position`: the committed departure at
/// the origin, `arrival + service` at a reached intermediate node.
pub fn departure_from(network: &Network, journey: &Journey, position: usize) -> Result<TimePoint> {
    let route = network.route(journey.route);
    if position == 0 {
        return Ok(journey.departure);
    }
    if position > route.len() {
        return Err(Error::PositionOutOfRange {
            position,
            len: route.len(),
        });
    }
    journey
        .arrival(position)
        .map(|a| a + route.service(position))
        .ok_or(Error::UnknownDeparture(position))
}

/// Latest possible landing at position `to` given the departure from `from - 1`.
pub fn latest_arrival(
    network: &Network,
    journey: &Journey,
    from: usize,
    to: usize,
) -> Result<TimePoint> {
    let route = network.route(journey.route);
    let max = route.max_travel(from, to)?;
    Ok(departure_from(network, journey, from.saturating_sub(1))? + max)
}

/// Window during which the vehicle may hold a spot at position `to`, from the
/// earliest possible landing to the latest landing plus service.
pub fn blocking_interval(
    network: &Network,
    journey: &Journey,
    from: usize,
    to: usize,
) -> Result<Interval> {
    let route = network.route(journey.route);
    let span = route.span(from, to)?;
    let dep = departure_from(network, journey, from - 1)?;
    let lo = dep + route.min_travel(from, to)?;
    Ok(Interval::new(lo, lo + span))
}

/// Length of [`blocking_interval`]; depends on the route only.
pub fn m_span(route: &Route, from: usize, to: usize) -> Result<Duration> {
    route.span(from, to)
}

/// Shortest and longest time from departing `from - 1` to landing at `to`.
pub fn travel_bounds(route: &Route, from: usize, to: usize) -> Result<(Duration, Duration)> {
    Ok((route.min_travel(from, to)?, route.max_travel(from, to)?))
}

/// Latest landing time at every node of the demand's route that still meets
/// the deadline under worst-case travel; the origin entry is the latest
/// departure.
pub fn latest_feasible_times(network: &Network, demand: &Demand) -> Vec<(NodeId, TimePoint)> {
    let route = network.route(demand.route);
    let departure = demand.deadline - route.max_total();
    (0..=route.len())
        .map(|p| (route.node(p), departure + route.max_reach(p)))
        .collect()
}

/// Blocking window at `position` using the freshest information: realized
/// positions report `[arrival, arrival + service]`, later ones are projected
/// from the last realized departure.
pub fn current_interval(network: &Network, journey: &Journey, position: usize) -> Interval {
    let route = network.route(journey.route);
    debug_assert!(position >= 1 && position <= route.len());
    if let Some(a) = journey.arrival(position) {
        return Interval::new(a, a + route.service(position));
    }
    let reached = journey.last_reached();
    blocking_interval(network, journey, reached + 1, position).expect("positions validated")
}

/// [`current_interval`] for every landing position `1..=k`.
pub fn current_intervals(network: &Network, journey: &Journey) -> Vec<Interval> {
    let k = network.route(journey.route).len();
    (1..=k)
        .map(|p| current_interval(network, journey, p))
        .collect()
}

/// Worst-case-from-origin windows for a departure at `departure`.
pub fn static_intervals(route: &Route, departure: TimePoint) -> Vec<Interval> {
    (1..=route.len())
        .map(|p| {
            Interval::new(
                departure + route.min_reach(p),
                departure + route.max_reach(p) + route.service(p),
            )
        })
        .collect()
}

/// Latest landing at the destination given everything realized so far.
pub fn current_latest_arrival(network: &Network, journey: &Journey) -> TimePoint {
    let k = network.route(journey.route).len();
    match journey.arrival(k) {
        Some(a) => a,
        None => latest_arrival(network, journey, journey.last_reached() + 1, k).expect("valid"),
    }
}

/// Sum over scheduled demands of `deadline - departure`.
pub fn sod_cost(schedule: &Schedule) -> Duration {
    schedule.journeys().map(|j| j.deadline - j.departure).sum()
}

/// Capacity-free bound on SoD: every demand needs at least its worst-case
/// route time between departure and deadline.
pub fn sod_lower_bound<'a>(
    network: &Network,
    demands: impl IntoIterator<Item = &'a Demand>,
) -> Duration {
    demands
        .into_iter()
        .map(|d| network.route(d.route).max_total())
        .sum()
}
