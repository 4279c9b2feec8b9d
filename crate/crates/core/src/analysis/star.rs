//! Long-run feasibility on star networks: single-edge branches into one hub.

use num_traits::Zero;

use super::lp::{q, ratio, Q};
use crate::error::{Error, Result};
use crate::model::{Demand, Network, NodeId, RouteId};
use crate::time::{Duration, TimePoint, TICKS_PER_MINUTE};

/// `per_period[i]` demands on branch `i` every `period`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicDemandSpec {
    pub period: Duration,
    pub per_period: Vec<u32>,
}

/// Long-run departure rate per branch, per minute.
pub fn demand_rate(spec: &PeriodicDemandSpec) -> Result<Vec<Q>> {
    if spec.period <= Duration::ZERO {
        return Err(Error::BadPeriod);
    }
    Ok(spec
        .per_period
        .iter()
        .map(|&h| ratio(h as i64 * TICKS_PER_MINUTE, spec.period.0))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Star {
    pub hub: NodeId,
    pub capacity: u32,
    /// Route and `x_max - x_min + w_hub` per branch, in route order.
    pub branches: Vec<(RouteId, Duration)>,
}

/// Checks that every route is one edge into a common hub from its own leaf.
pub fn star_structure(net: &Network) -> Result<Star> {
    let routes = net.routes();
    let first = routes
        .first()
        .ok_or_else(|| Error::NotAStar("no routes".into()))?;
    let hub = first.destination();
    let mut leaves = Vec::new();
    let mut branches = Vec::new();
    for r in net.route_ids() {
        let route = net.route(r);
        if route.len() != 1 {
            return Err(Error::NotAStar(format!(
                "route `{}` has {} edges",
                route.name,
                route.len()
            )));
        }
        if route.destination() != hub {
            return Err(Error::NotAStar(format!(
                "route `{}` does not end at the hub",
                route.name
            )));
        }
        if leaves.contains(&route.origin()) {
            return Err(Error::NotAStar(format!(
                "two routes leave `{}`",
                net.node(route.origin()).name
            )));
        }
        leaves.push(route.origin());
        branches.push((r, route.span_from_origin(1)));
    }
    for e in net.edges() {
        if e.head != hub || !leaves.contains(&e.tail) {
            return Err(Error::NotAStar(format!(
                "edge `{}` is not a branch",
                e.name
            )));
        }
    }
    Ok(Star {
        hub,
        capacity: net.capacity(hub),
        branches,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarVerdict {
    pub feasible: bool,
    /// `sum r_i * (x_max - x_min + w)`.
    pub load: Q,
    pub capacity: u32,
}

/// Long-run feasibility: load at most the hub capacity. `rates[i]` belongs to route `i`.
pub fn star_feasibility(net: &Network, rates: &[Q]) -> Result<StarVerdict> {
    let star = star_structure(net)?;
    if rates.len() != star.branches.len() {
        return Err(Error::Invalid(format!(
            "{} rates for {} branches",
            rates.len(),
            star.branches.len()
        )));
    }
    let load: Q = star
        .branches
        .iter()
        .zip(rates)
        .map(|((_, span), r)| r * ratio(span.0, TICKS_PER_MINUTE))
        .sum();
    Ok(StarVerdict {
        feasible: load <= q(star.capacity as i64),
        load,
        capacity: star.capacity,
    })
}

/// Backlog at each deadline `f_T` in `[t0, t0 + horizon]`: spot-minutes
/// owed by demands due by `f_T`, divided by the hub capacity, minus the
/// elapsed time `f_T - t0`. Minutes.
pub fn star_backlog_series(
    net: &Network,
    demands: &[Demand],
    t0: TimePoint,
    horizon: Duration,
) -> Result<Vec<(TimePoint, Q)>> {
    let star = star_structure(net)?;
    if star.capacity == 0 {
        return Err(Error::Invalid("hub has no capacity".into()));
    }
    let span_of = |r: RouteId| {
        star.branches
            .iter()
            .find(|(b, _)| *b == r)
            .map(|&(_, s)| s)
            .expect("star route")
    };
    let mut due: Vec<(TimePoint, Duration)> = demands
        .iter()
        .filter(|d| d.deadline >= t0 && d.deadline <= t0 + horizon)
        .map(|d| (d.deadline, span_of(d.route)))
        .collect();
    due.sort();
    let mut out: Vec<(TimePoint, Q)> = Vec::new();
    let mut owed = Q::zero();
    let cap = star.capacity as i64 * TICKS_PER_MINUTE;
    for (i, &(f, span)) in due.iter().enumerate() {
        owed += ratio(span.0, cap);
        if due.get(i + 1).is_some_and(|&(g, _)| g == f) {
            continue;
        }
        out.push((f, &owed - ratio((f - t0).0, TICKS_PER_MINUTE)));
    }
    Ok(out)
}

/// Largest backlog in a series; zero when empty.
pub fn max_backlog(series: &[(TimePoint, Q)]) -> Q {
    series
        .iter()
        .map(|(_, b)| b.clone())
        .max()
        .unwrap_or_else(Q::zero)
}
