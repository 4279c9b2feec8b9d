mod common;

use proptest::prelude::*;
use uamsched::io::{self, ScheduleFile};
use uamsched::model::{
    audit_schedule, capacity_excess, current_interval, sod_cost, sod_lower_bound, static_intervals,
    Information, Violation,
};
use uamsched::{cases, Demand, Duration, Interval, Journey, Network, Schedule, TimePoint};

fn route_sums(net: &Network, r: uamsched::RouteId, p: usize) -> (Duration, Duration, Duration) {
    let route = net.route(r);
    let (mut lo, mut hi, mut service) = (Duration::ZERO, Duration::ZERO, Duration::ZERO);
    for (i, &e) in route.edges()[..p].iter().enumerate() {
        let edge = net.edge(e);
        lo += edge.min_time;
        hi += edge.max_time;
        if i + 1 < p {
            service += net.node(edge.head).service_time;
        }
    }
    (lo, hi, service)
}

#[test]
fn static_windows_follow_edge_sums() {
    for (_, net) in common::networks() {
        for r in net.route_ids() {
            let route = net.route(r);
            for dep in [-7, 0, 13] {
                let wins = static_intervals(route, TimePoint::minutes(dep));
                for p in 1..=route.len() {
                    let (lo, hi, service) = route_sums(&net, r, p);
                    let w = net.node(route.node(p)).service_time;
                    let expect = Interval::new(
                        TimePoint::minutes(dep) + lo + service,
                        TimePoint::minutes(dep) + hi + service + w,
                    );
                    assert_eq!(wins[p - 1], expect, "{} position {p}", route.name);
                    assert_eq!(wins[p - 1].len(), route.span_from_origin(p));
                }
            }
        }
    }
}

#[test]
fn lower_bound_sums_worst_case_times() {
    let net = cases::atlanta();
    let demands = cases::atlanta_demands(&net);
    let expect: Duration = demands
        .iter()
        .map(|d| {
            let k = net.route(d.route).len();
            let (_, hi, service) = route_sums(&net, d.route, k);
            hi + service
        })
        .sum();
    assert_eq!(sod_lower_bound(&net, &demands), expect);
}

#[test]
fn realized_windows_shrink_inside_static() {
    let net = cases::fig3();
    let mut rng = common::rng(3);
    for d in common::random_demands(&net, &mut rng, 40, TimePoint::ZERO, 30) {
        let route = net.route(d.route);
        let mut j = Journey::new(&d, TimePoint::ZERO);
        let statics = static_intervals(route, j.departure);
        let mut at = j.departure;
        for p in 1..=route.len() {
            let w = current_interval(&net, &j, p);
            let arrival =
                TimePoint((w.lo.0 + w.hi.0 - net.node(route.node(p)).service_time.0) / 2).max(w.lo);
            assert!(arrival >= at);
            j.record_arrival(&net, arrival).unwrap();
            at = arrival + route.service(p);
            for q in 1..=route.len() {
                assert!(
                    statics[q - 1].contains(&current_interval(&net, &j, q)),
                    "{} position {q} after {p}",
                    route.name
                );
            }
        }
        assert!(j.is_complete(&net));
    }
}

#[test]
fn schedule_json_round_trip_keeps_audit() {
    let net = cases::two_link();
    let demands = cases::two_link_demands(&net);
    let r = demands[0].route;
    let mut a = Journey::new(&demands[0], TimePoint::ZERO);
    a.spots = vec![0, 0];
    let mut b = Journey::new(&demands[1], TimePoint::minutes(3));
    b.spots = vec![0, 0];
    let s: Schedule = [a, b].into_iter().collect();
    let file = ScheduleFile::from_schedule(&net, &s, sod_lower_bound(&net, &demands), true);
    let back: ScheduleFile = io::from_json(&file.to_json()).unwrap();
    let rebuilt = back.to_schedule(&net, &demands).unwrap();
    assert_eq!(rebuilt.departures(), s.departures());
    assert_eq!(sod_cost(&rebuilt), Duration::minutes(16));
    let clash = audit_schedule(&rebuilt, &net, Information::WorstCase);
    assert!(clash
        .violations
        .iter()
        .any(|v| matches!(v, Violation::CapacityExceeded { .. })));
    assert_eq!(r, rebuilt.get(demands[1].id).unwrap().route);
}

#[test]
fn demand_ids_must_be_unique_in_files() {
    let net = cases::two_link();
    let text = r#"{"demands": [{"id": 1, "route": "R", "deadline_min": 8}, {"id": 1, "route": "R", "deadline_min": 9}]}"#;
    assert!(io::parse_demands(text, &net).is_err());
    let unknown = r#"{"demands": [{"id": 1, "route": "nope", "deadline_min": 8}]}"#;
    assert!(io::parse_demands(unknown, &net).is_err());
}

fn brute_excess(windows: &[Interval], capacity: u32) -> Vec<TimePoint> {
    let mut points: Vec<TimePoint> = windows.iter().map(|w| w.lo).collect();
    points.sort();
    points.dedup();
    points
        .into_iter()
        .filter(|&t| windows.iter().filter(|w| w.covers(t)).count() > capacity as usize)
        .collect()
}

proptest! {
    #[test]
    fn capacity_excess_matches_sweep(raw in prop::collection::vec((0i64..40, 0i64..10), 0..12), cap in 0u32..4) {
        let windows: Vec<Interval> = raw.iter().map(|&(lo, len)| Interval::new(TimePoint::minutes(lo), TimePoint::minutes(lo + len))).collect();
        let fast: Vec<TimePoint> = capacity_excess(&windows, cap).into_iter().map(|(t, _)| t).collect();
        let slow = brute_excess(&windows, cap);
        prop_assert_eq!(fast.is_empty(), slow.is_empty());
        for t in fast {
            prop_assert!(windows.iter().filter(|w| w.covers(t)).count() > cap as usize);
        }
    }

    #[test]
    fn sod_counts_deadline_minus_departure(deps in prop::collection::vec(-20i64..20, 1..8)) {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let s: Schedule = deps
            .iter()
            .enumerate()
            .map(|(i, &x)| Journey::new(&Demand::new(i as u64 + 1, r, TimePoint::minutes(30)), TimePoint::minutes(x)))
            .collect();
        let expect: i64 = deps.iter().map(|x| 30 - x).sum();
        prop_assert_eq!(sod_cost(&s), Duration::minutes(expect));
    }
}
