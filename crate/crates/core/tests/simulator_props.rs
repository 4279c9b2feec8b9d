mod common;

use std::collections::BTreeMap;

use uamsched::cases::{self, ExpectedMetrics, Source};
use uamsched::model::sod_lower_bound;
use uamsched::simulator::{replay_audit, run_simulation, EventKind, SimConfig, SimTrace};
use uamsched::{DemandId, Network, TimePoint};

fn run(net: &Network, seed: u64) -> SimTrace {
    let demands = cases::fig3_dynamic_demands(net, seed);
    run_simulation(
        net,
        &demands,
        &common::node_budget(20_000),
        &SimConfig {
            seed,
            ..SimConfig::default()
        },
    )
    .unwrap()
}

#[test]
fn same_seed_same_trace() {
    let net = cases::fig3();
    let (a, b) = (run(&net, 11), run(&net, 11));
    assert_eq!(a.events, b.events);
    assert_eq!(a.schedule.departures(), b.schedule.departures());
    assert_ne!(run(&net, 12).events, a.events);
}

#[test]
fn realized_travel_stays_in_bounds() {
    let net = cases::fig3();
    for seed in 0..5 {
        let trace = run(&net, seed);
        assert!(trace
            .events
            .windows(2)
            .all(|w| (w[0].time, w[0].kind) <= (w[1].time, w[1].kind)));
        let mut last_departure: BTreeMap<DemandId, (TimePoint, usize)> = BTreeMap::new();
        for e in &trace.events {
            match e.kind {
                EventKind::Takeoff | EventKind::ServiceComplete => {
                    last_departure.insert(e.demand, (e.time, e.position));
                }
                EventKind::Landing => {
                    let (off, from) = last_departure[&e.demand];
                    let j = trace.schedule.get(e.demand).unwrap();
                    let edge = net.edge(net.route(j.route).edges()[from]);
                    let flown = e.time - off;
                    assert!(
                        flown >= edge.min_time && flown <= edge.max_time,
                        "seed {seed}: {:?} flew {flown}",
                        e.demand
                    );
                }
                _ => {}
            }
        }
        assert!(replay_audit(&trace, &net).is_clean(), "seed {seed}");
        assert!(
            trace.breaches.is_empty() && trace.deadline_misses.is_empty(),
            "seed {seed}"
        );
    }
}

#[test]
fn departures_follow_releases_and_decisions() {
    let net = cases::fig3();
    let demands = cases::fig3_dynamic_demands(&net, 4);
    let trace = run(&net, 4);
    let release: BTreeMap<DemandId, TimePoint> =
        demands.iter().map(|d| (d.id, d.release)).collect();
    for d in &trace.decisions {
        for id in &d.scheduled {
            let j = trace.schedule.get(*id).unwrap();
            assert!(j.departure >= d.time && d.time >= release[id], "{id:?}");
        }
    }
    assert!(
        trace.scheduled_sod
            >= sod_lower_bound(
                &net,
                demands.iter().filter(|d| trace.schedule.contains(d.id))
            )
    );
    assert_eq!(
        trace.completed(&net) + trace.dropped.len() + trace.unscheduled.len(),
        demands.len()
    );
}

#[test]
fn sidecars_label_every_number() {
    for text in [
        cases::TWO_LINK_EXPECTED_JSON,
        cases::FIG3_EXPECTED_JSON,
        cases::ATLANTA_EXPECTED_JSON,
    ] {
        let m = ExpectedMetrics::parse(text).unwrap();
        assert!(!m.metrics.is_empty());
    }
    let missing = r#"{"metrics": [{"name": "x", "value": 1.0}]}"#;
    assert!(ExpectedMetrics::parse(missing).is_err());
    let atlanta = ExpectedMetrics::parse(cases::ATLANTA_EXPECTED_JSON).unwrap();
    assert_eq!(
        atlanta.get("optimal_sod_min").unwrap().source,
        Source::Published
    );
    assert_eq!(
        atlanta.value("demand_count") as usize,
        cases::atlanta_demands(&cases::atlanta()).len()
    );
    let net = cases::atlanta();
    let bound = sod_lower_bound(&net, &cases::atlanta_demands(&net)).as_minutes();
    assert_eq!(bound, atlanta.value("recomputed_lower_bound_min"));
}
