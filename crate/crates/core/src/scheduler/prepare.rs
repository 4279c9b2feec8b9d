//! Turning search branches into journeys with parking spots.

use super::bnb::{bnb_schedule, BnbConfig, Branch, Problem, SearchStats};
use super::table::BlockTable;
use crate::error::{Error, Result};
use crate::model::{static_intervals, Demand, DemandId, Journey, Network, NodeId};
use crate::time::{Interval, TimePoint};

/// Worst-case windows of one journey at its landing nodes, in route order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotRequest {
    pub demand: DemandId,
    pub windows: Vec<(NodeId, Interval)>,
}

impl SpotRequest {
    pub fn for_departure(net: &Network, demand: &Demand, departure: TimePoint) -> Self {
        let route = net.route(demand.route);
        let windows = (1..=route.len())
            .map(|p| route.node(p))
            .zip(static_intervals(route, departure))
            .collect();
        SpotRequest {
            demand: demand.id,
            windows,
        }
    }
}

/// Spot per request and window. At every node the windows are taken in
/// descending order of their end (ties by demand id); each goes to the spot
/// with the largest next-free-before time that can hold it, which then drops
/// to the window's start. Spots already reserved in `table` are respected.
pub fn assign_spots(requests: &[SpotRequest], table: &BlockTable) -> Result<Vec<Vec<u32>>> {
    let mut out: Vec<Vec<u32>> = requests.iter().map(|r| vec![0; r.windows.len()]).collect();
    let mut by_node: Vec<(NodeId, Vec<(usize, usize)>)> = Vec::new();
    for (i, r) in requests.iter().enumerate() {
        for (k, &(v, _)) in r.windows.iter().enumerate() {
            match by_node.iter_mut().find(|(n, _)| *n == v) {
                Some((_, list)) => list.push((i, k)),
                None => by_node.push((v, vec![(i, k)])),
            }
        }
    }
    for (v, mut list) in by_node {
        let window = |&(i, k): &(usize, usize)| requests[i].windows[k].1;
        list.sort_by(|a, b| {
            window(b)
                .hi
                .cmp(&window(a).hi)
                .then(requests[a.0].demand.cmp(&requests[b.0].demand))
        });
        let mut free = vec![TimePoint::POS_INF; table.capacity(v)];
        for item in list {
            let w = window(&item);
            let mut pick: Option<usize> = None;
            for (c, &f) in free.iter().enumerate() {
                if f >= w.hi && table.is_free(v, c as u32, w) && pick.is_none_or(|b| f > free[b]) {
                    pick = Some(c);
                }
            }
            let c = pick.ok_or_else(|| {
                Error::Invalid(format!(
                    "no spot for demand {} at node #{} during {w}",
                    requests[item.0].demand, v.0
                ))
            })?;
            free[c] = w.lo;
            out[item.0][item.1] = c as u32;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Prepared {
    /// Journeys in deadline order, or `None` when no branch was found.
    pub journeys: Option<Vec<Journey>>,
    pub stats: SearchStats,
}

/// Journeys for a stored branch, with spots.
pub fn expand_branch(
    net: &Network,
    problem: &Problem,
    demands: &[Demand],
    branch: &Branch,
    table: &BlockTable,
) -> Result<Vec<Journey>> {
    let by_id = |id: DemandId| {
        demands
            .iter()
            .find(|d| d.id == id)
            .expect("demand of the problem")
    };
    let chosen: Vec<(&Demand, TimePoint)> = problem
        .jobs
        .iter()
        .zip(&branch.departures)
        .map(|(j, &d)| (by_id(j.demand), TimePoint(d)))
        .collect();
    let requests: Vec<SpotRequest> = chosen
        .iter()
        .map(|&(d, t)| SpotRequest::for_departure(net, d, t))
        .collect();
    let spots = assign_spots(&requests, table)?;
    Ok(chosen
        .into_iter()
        .zip(spots)
        .map(|((d, t), s)| {
            let mut j = Journey::new(d, t);
            j.spots = s;
            j
        })
        .collect())
}

/// Searches departures for `demands` at or after `floor` around the
/// reservations in `table`, then takes the stored branch with the smallest
/// SoD that admits a spot assignment.
pub fn prepare_schedule(
    net: &Network,
    demands: &[Demand],
    table: &BlockTable,
    floor: TimePoint,
    cfg: &BnbConfig,
) -> Prepared {
    let problem = Problem::new(net, demands, table, floor);
    let result = bnb_schedule(&problem, cfg);
    let journeys = result
        .branches
        .iter()
        .find_map(|b| expand_branch(net, &problem, demands, b, table).ok());
    Prepared {
        journeys,
        stats: result.stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::model::{audit_schedule, Information, Schedule};
    use crate::scheduler::bnb::Budget;

    fn t(m: i64) -> TimePoint {
        TimePoint::minutes(m)
    }

    fn iv(a: i64, b: i64) -> Interval {
        Interval::new(t(a), t(b))
    }

    fn exhaustive() -> BnbConfig {
        BnbConfig {
            budget: Budget::Exhaustive,
            ..BnbConfig::default()
        }
    }

    #[test]
    fn overlapping_windows_get_distinct_spots() {
        let net = cases::fig3();
        let v8 = net.node_id("v8").unwrap();
        let reqs = [
            SpotRequest {
                demand: DemandId(1),
                windows: vec![(v8, iv(0, 10))],
            },
            SpotRequest {
                demand: DemandId(2),
                windows: vec![(v8, iv(5, 15))],
            },
        ];
        let spots = assign_spots(&reqs, &BlockTable::new(&net)).unwrap();
        assert_ne!(spots[0][0], spots[1][0]);
    }

    #[test]
    fn sequential_windows_share_one_spot() {
        let net = cases::two_link();
        let v3 = net.node_id("v3").unwrap();
        let reqs: Vec<SpotRequest> = [(1, iv(5, 10)), (2, iv(15, 20)), (3, iv(25, 30))]
            .into_iter()
            .map(|(id, w)| SpotRequest {
                demand: DemandId(id),
                windows: vec![(v3, w)],
            })
            .collect();
        let spots = assign_spots(&reqs, &BlockTable::new(&net)).unwrap();
        assert!(spots.iter().all(|s| s == &vec![0]));
        let clash = [
            SpotRequest {
                demand: DemandId(1),
                windows: vec![(v3, iv(5, 10))],
            },
            SpotRequest {
                demand: DemandId(2),
                windows: vec![(v3, iv(9, 12))],
            },
        ];
        assert!(assign_spots(&clash, &BlockTable::new(&net)).is_err());
    }

    #[test]
    fn single_demand() {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let p = prepare_schedule(
            &net,
            &[Demand::new(1, r, t(8))],
            &BlockTable::new(&net),
            t(0),
            &exhaustive(),
        );
        let js = p.journeys.unwrap();
        assert_eq!(js[0].departure, t(0));
        assert_eq!(js[0].spots, vec![0, 0]);
    }

    #[test]
    fn same_route_pair() {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let demands = [Demand::new(1, r, t(8)), Demand::new(2, r, t(16))];
        let js = prepare_schedule(&net, &demands, &BlockTable::new(&net), t(0), &exhaustive())
            .journeys
            .unwrap();
        assert_eq!(
            js.iter().map(|j| j.departure).collect::<Vec<_>>(),
            vec![t(0), t(8)]
        );
        let infeasible = [Demand::new(1, r, t(8)), Demand::new(2, r, t(8))];
        assert!(prepare_schedule(
            &net,
            &infeasible,
            &BlockTable::new(&net),
            t(0),
            &exhaustive()
        )
        .journeys
        .is_none());
    }

    #[test]
    fn atlanta_static_schedule_is_clean() {
        let net = cases::atlanta();
        let demands = cases::atlanta_demands(&net);
        let js = prepare_schedule(
            &net,
            &demands,
            &BlockTable::new(&net),
            TimePoint::NEG_INF,
            &exhaustive(),
        )
        .journeys
        .unwrap();
        let s: Schedule = js.into_iter().collect();
        assert!(audit_schedule(&s, &net, Information::WorstCase).is_clean());
    }
}
