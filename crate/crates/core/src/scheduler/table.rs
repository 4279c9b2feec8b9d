//! Per-spot reservations at every landing node.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{current_interval, DemandId, Network, NodeId, Schedule};
use crate::time::{Duration, Interval, TimePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reservation {
    pub interval: Interval,
    pub demand: DemandId,
}

/// Reserved windows per node and spot. Windows on one spot never overlap.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockTable {
    spots: BTreeMap<NodeId, Vec<Vec<Reservation>>>,
}

impl BlockTable {
    pub fn new(net: &Network) -> Self {
        let spots = net
            .node_ids()
            .filter_map(|v| {
                net.node(v)
                    .capacity
                    .map(|c| (v, vec![Vec::new(); c as usize]))
            })
            .collect();
        BlockTable { spots }
    }

    /// Windows of every journey in `schedule` from the freshest information:
    /// realized landings hold `[A, A + w)`, the rest are projected from the
    /// last realized departure. Journeys without spots take the lowest free
    /// spot at each node.
    pub fn from_schedule(net: &Network, schedule: &Schedule) -> Result<Self> {
        let mut table = BlockTable::new(net);
        for j in schedule.journeys() {
            let route = net.route(j.route);
            for p in 1..=route.len() {
                let v = route.node(p);
                let w = current_interval(net, j, p);
                let spot = match j.spot(p) {
                    Some(c) => c,
                    None => (0..table.capacity(v) as u32)
                        .find(|&c| table.is_free(v, c, w))
                        .ok_or_else(|| {
                            Error::Invalid(format!(
                                "no free spot for demand {} at node #{}",
                                j.demand, v.0
                            ))
                        })?,
                };
                table.reserve(v, spot, w, j.demand)?;
            }
        }
        Ok(table)
    }

    pub fn capacity(&self, node: NodeId) -> usize {
        self.spots.get(&node).map_or(0, Vec::len)
    }

    pub fn spot(&self, node: NodeId, spot: u32) -> &[Reservation] {
        self.spots
            .get(&node)
            .and_then(|s| s.get(spot as usize))
            .map_or(&[], Vec::as_slice)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.spots.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.spots.values().all(|s| s.iter().all(Vec::is_empty))
    }

    pub fn is_free(&self, node: NodeId, spot: u32, interval: Interval) -> bool {
        self.spot(node, spot)
            .iter()
            .all(|r| !r.interval.overlaps(&interval))
    }

    pub fn reserve(
        &mut self,
        node: NodeId,
        spot: u32,
        interval: Interval,
        demand: DemandId,
    ) -> Result<()> {
        let cap = self.capacity(node);
        if spot as usize >= cap {
            return Err(Error::Invalid(format!(
                "spot {} out of range at node #{} (capacity {cap})",
                spot + 1,
                node.0
            )));
        }
        if !self.is_free(node, spot, interval) {
            return Err(Error::Invalid(format!(
                "demand {demand}: spot {} at node #{} is taken during {interval}",
                spot + 1,
                node.0
            )));
        }
        let list = &mut self.spots.get_mut(&node).expect("checked")[spot as usize];
        let at =
            list.partition_point(|r| (r.interval.lo, r.interval.hi) <= (interval.lo, interval.hi));
        list.insert(at, Reservation { interval, demand });
        Ok(())
    }

    /// Latest reserved instant across all spots (`NEG_INF` when empty).
    pub fn max_end(&self) -> TimePoint {
        self.spots
            .values()
            .flatten()
            .flatten()
            .filter(|r| !r.interval.is_empty())
            .map(|r| r.interval.hi)
            .max()
            .unwrap_or(TimePoint::NEG_INF)
    }

    /// Latest departure `<= upper` whose window `[d + lo, d + hi)` avoids
    /// every reservation on the spot.
    pub fn latest_free(
        &self,
        node: NodeId,
        spot: u32,
        lo: Duration,
        hi: Duration,
        upper: TimePoint,
    ) -> TimePoint {
        TimePoint(latest_free(
            self.spot(node, spot)
                .iter()
                .map(|r| (r.interval.lo.0, r.interval.hi.0)),
            lo.0,
            hi.0,
            upper.0,
        ))
    }
}

/// Latest `d <= upper` with `[d + lo, d + hi)` clear of the reserved windows.
/// `reserved` must be disjoint and sorted by start; it is scanned from the
/// back. Empty windows always fit.
pub fn latest_free(
    reserved: impl DoubleEndedIterator<Item = (i64, i64)>,
    lo: i64,
    hi: i64,
    upper: i64,
) -> i64 {
    let mut d = upper;
    if hi <= lo {
        return d;
    }
    for (a, b) in reserved.rev() {
        if a >= b {
            continue;
        }
        if d >= b - lo {
            break;
        }
        if d > a - hi {
            d = a - hi;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::model::{Demand, Journey};

    fn t(m: i64) -> TimePoint {
        TimePoint::minutes(m)
    }

    #[test]
    fn latest_free_skips_back_over_reservations() {
        // window length 5 starting 1 after departure; reserved [10,15), [17,20)
        let res = [(10, 15), (17, 20)];
        assert_eq!(latest_free(res.iter().copied(), 1, 6, 30), 30);
        assert_eq!(latest_free(res.iter().copied(), 1, 6, 18), 4);
        // touching endpoints are fine
        assert_eq!(latest_free(res.iter().copied(), 1, 6, 14), 4);
        assert_eq!(latest_free(res.iter().copied(), 1, 3, 14), 14);
        assert_eq!(latest_free([].into_iter(), 0, 5, 7), 7);
    }

    #[test]
    fn best_information_table_after_landing() {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let mut j = Journey::new(&Demand::new(1, r, t(8)), t(0));
        j.spots = vec![0, 0];
        let s: Schedule = [j.clone()].into_iter().collect();
        let table = BlockTable::from_schedule(&net, &s).unwrap();
        assert_eq!(table.max_end(), t(9));

        j.record_arrival(&net, t(2)).unwrap();
        let s: Schedule = [j].into_iter().collect();
        let table = BlockTable::from_schedule(&net, &s).unwrap();
        let v2 = net.node_id("v2").unwrap();
        let v3 = net.node_id("v3").unwrap();
        assert_eq!(table.spot(v2, 0)[0].interval, Interval::new(t(2), t(3)));
        assert_eq!(table.spot(v3, 0)[0].interval, Interval::new(t(5), t(7)));
        assert_eq!(table.max_end(), t(7));
        assert_eq!(BlockTable::new(&net).max_end(), TimePoint::NEG_INF);
    }

    #[test]
    fn reserve_rejects_overlap() {
        let net = cases::two_link();
        let v3 = net.node_id("v3").unwrap();
        let mut table = BlockTable::new(&net);
        table
            .reserve(v3, 0, Interval::new(t(5), t(7)), DemandId(1))
            .unwrap();
        table
            .reserve(v3, 0, Interval::new(t(7), t(12)), DemandId(2))
            .unwrap();
        assert!(table
            .reserve(v3, 0, Interval::new(t(6), t(8)), DemandId(3))
            .is_err());
        assert!(table
            .reserve(v3, 1, Interval::new(t(6), t(8)), DemandId(3))
            .is_err());
    }
}
