//! Extending a committed schedule with new demands.

use super::bnb::{BnbConfig, SearchStats};
use super::prepare::prepare_schedule;
use super::table::BlockTable;
use crate::error::Result;
use crate::model::{Demand, Journey, Network, Schedule};
use crate::time::{Interval, TimePoint};

#[derive(Debug, Clone, Default)]
pub struct InsertionOutcome {
    /// New journeys, or `None` when the demands cannot all be added.
    pub journeys: Option<Vec<Journey>>,
    /// Search statistics of every preparation attempt.
    pub searches: Vec<SearchStats>,
}

/// Latest departure of `demand` at or after `floor` whose worst-case windows
/// fit into free gaps of `table`, reserving them on the lowest free spots.
pub fn gap_insert(
    net: &Network,
    table: &mut BlockTable,
    demand: &Demand,
    floor: TimePoint,
) -> Option<Journey> {
    let route = net.route(demand.route);
    let legs: Vec<_> = (1..=route.len())
        .map(|p| {
            (
                route.node(p),
                route.min_reach(p),
                route.max_reach(p) + route.service(p),
            )
        })
        .collect();
    let mut d = demand.latest_departure(net);
    loop {
        if d < floor {
            return None;
        }
        let mut next = d;
        for &(v, lo, hi) in &legs {
            let best = (0..table.capacity(v) as u32)
                .map(|c| table.latest_free(v, c, lo, hi, d))
                .max()?;
            next = next.min(best);
        }
        if next == d {
            break;
        }
        d = next;
    }
    let mut journey = Journey::new(demand, d);
    for &(v, lo, hi) in &legs {
        let w = Interval::new(d + lo, d + hi);
        let c = (0..table.capacity(v) as u32).find(|&c| table.is_free(v, c, w))?;
        table.reserve(v, c, w, demand.id).ok()?;
        journey.spots.push(c);
    }
    Some(journey)
}

/// Adds all of `demands` to `old` without moving any committed departure.
/// Demands whose latest landing window starts before the end of the current
/// reservations are slotted into gaps, latest deadline first; the rest are
/// searched jointly after them. When the search fails, its earliest demand
/// joins the gap-filled group and the attempt repeats.
pub fn insertion(
    net: &Network,
    demands: &[Demand],
    old: &Schedule,
    now: TimePoint,
    cfg: &BnbConfig,
) -> Result<InsertionOutcome> {
    let table = BlockTable::from_schedule(net, old)?;
    let horizon = table.max_end();
    let (mut early, mut late): (Vec<Demand>, Vec<Demand>) =
        demands.iter().cloned().partition(|d| {
            let route = net.route(d.route);
            let k = route.len();
            d.deadline - route.max_reach(k) + route.min_reach(k) <= horizon
        });
    late.sort_by_key(|d| (d.deadline, d.id));
    let mut out = InsertionOutcome::default();
    loop {
        early.sort_by_key(|d| std::cmp::Reverse((d.deadline, d.id)));
        let mut working = table.clone();
        let mut placed = Vec::with_capacity(demands.len());
        for d in &early {
            match gap_insert(net, &mut working, d, now) {
                Some(j) => placed.push(j),
                None => return Ok(out),
            }
        }
        if late.is_empty() {
            out.journeys = Some(placed);
            return Ok(out);
        }
        let prepared = prepare_schedule(net, &late, &working, now, cfg);
        out.searches.push(prepared.stats);
        if let Some(js) = prepared.journeys {
            placed.extend(js);
            out.journeys = Some(placed);
            return Ok(out);
        }
        early.push(late.remove(0));
    }
}
