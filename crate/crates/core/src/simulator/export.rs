//! Plot-ready CSV: the event log and per-node blocking bars.

use std::fmt::Write;

use super::SimTrace;
use crate::model::{current_interval, static_intervals, DemandId, Network, NodeId, Schedule};
use crate::time::{format_minutes, Interval, TimePoint};

/// `time_min,event,demand,node,spot` with 1-based spots.
pub fn trace_csv(net: &Network, trace: &SimTrace) -> String {
    let mut out = String::from("time_min,event,demand,node,spot\n");
    for e in &trace.events {
        let spot = e.spot.map_or(String::new(), |c| (c + 1).to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_minutes(e.time.0),
            e.kind.name(),
            e.demand,
            net.node(e.node).name,
            spot
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GanttRow {
    pub node: NodeId,
    pub demand: DemandId,
    pub spot: Option<u32>,
    pub block: Interval,
    pub arrival: Option<TimePoint>,
}

/// One bar per journey and landing node, grouped by node. With `at`, bars
/// use the arrivals realized by then; without it, the worst case from the
/// departure. The realized arrival column always shows the full record.
pub fn gantt_rows(net: &Network, schedule: &Schedule, at: Option<TimePoint>) -> Vec<GanttRow> {
    let mut rows = Vec::new();
    for j in schedule.journeys() {
        let route = net.route(j.route);
        let blocks = match at {
            None => static_intervals(route, j.departure),
            Some(t) => {
                let mut known = j.clone();
                known.arrivals.retain(|&a| a <= t);
                (1..=route.len())
                    .map(|p| current_interval(net, &known, p))
                    .collect()
            }
        };
        for (i, block) in blocks.into_iter().enumerate() {
            let p = i + 1;
            rows.push(GanttRow {
                node: route.node(p),
                demand: j.demand,
                spot: j.spot(p),
                block,
                arrival: j.arrival(p),
            });
        }
    }
    rows.sort_by_key(|r| (r.node, r.spot, r.block.lo, r.demand));
    rows
}

/// Bars for the journeys scheduled by `at`, as known at `at`.
pub fn trace_gantt_rows(net: &Network, trace: &SimTrace, at: TimePoint) -> Vec<GanttRow> {
    let known: Schedule = trace
        .decisions
        .iter()
        .filter(|d| d.time <= at)
        .flat_map(|d| d.scheduled.iter())
        .filter_map(|id| trace.schedule.get(*id).cloned())
        .collect();
    gantt_rows(net, &known, Some(at))
}

/// `node,demand,spot,block_lo_min,block_hi_min,realized_arrival_min`.
pub fn gantt_csv(net: &Network, rows: &[GanttRow]) -> String {
    let mut out = String::from("node,demand,spot,block_lo_min,block_hi_min,realized_arrival_min\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            net.node(r.node).name,
            r.demand,
            r.spot.map_or(String::new(), |c| (c + 1).to_string()),
            format_minutes(r.block.lo.0),
            format_minutes(r.block.hi.0),
            r.arrival.map_or(String::new(), |a| format_minutes(a.0))
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::model::{Demand, Journey};

    #[test]
    fn gantt_for_example_schedule() {
        let net = cases::two_link();
        let t = TimePoint::minutes;
        let r = net.route_id("R").unwrap();
        let mut j1 = Journey::new(&Demand::new(1, r, t(8)), t(0));
        j1.spots = vec![0, 0];
        j1.record_arrival(&net, t(2)).unwrap();
        let s: Schedule = [j1].into_iter().collect();
        let csv = gantt_csv(&net, &gantt_rows(&net, &s, None));
        assert_eq!(csv.lines().nth(1).unwrap(), "v2,1,1,1.000,5.000,2.000");
        assert_eq!(csv.lines().nth(2).unwrap(), "v3,1,1,4.000,9.000,");
        let later = gantt_csv(&net, &gantt_rows(&net, &s, Some(t(2))));
        assert_eq!(later.lines().nth(2).unwrap(), "v3,1,1,5.000,7.000,");
        let before = gantt_csv(&net, &gantt_rows(&net, &s, Some(t(1))));
        assert_eq!(before.lines().nth(2).unwrap(), "v3,1,1,4.000,9.000,");
    }
}
