//! Bundled case-study networks, demand generators and expected metrics.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{from_json, parse_demands, parse_network, Minutes};
use crate::model::{Demand, DemandId, Network};
use crate::time::{Duration, TimePoint, TICKS_PER_MINUTE};

pub const TWO_LINK_JSON: &str = include_str!("../../../cases/two_link.json");
pub const EX1_DEMANDS_JSON: &str = include_str!("../../../cases/ex1_demands.json");
pub const FIG3_JSON: &str = include_str!("../../../cases/fig3.json");
pub const ATLANTA_JSON: &str = include_str!("../../../cases/atlanta.json");
pub const ATLANTA_GENERATOR_JSON: &str = include_str!("../../../cases/atlanta.generator.json");
pub const FIG3_DYNAMIC_GENERATOR_JSON: &str =
    include_str!("../../../cases/fig3_dynamic.generator.json");
pub const FIG3_STATIC200_GENERATOR_JSON: &str =
    include_str!("../../../cases/fig3_static200.generator.json");
pub const TWO_LINK_EXPECTED_JSON: &str = include_str!("../../../cases/two_link.expected.json");
pub const FIG3_EXPECTED_JSON: &str = include_str!("../../../cases/fig3.expected.json");
pub const ATLANTA_EXPECTED_JSON: &str = include_str!("../../../cases/atlanta.expected.json");

/// Two edges in series, `[1,4]` then `[2,3]`, one spot and one minute of
/// service at each landing node.
pub fn two_link() -> Network {
    parse_network(TWO_LINK_JSON).expect("bundled network")
}

/// The eight-node network with four routes.
pub fn fig3() -> Network {
    parse_network(FIG3_JSON).expect("bundled network")
}

/// Three exurbs feeding Atlanta through 0, 1 and 2 intermediate stops.
pub fn atlanta() -> Network {
    parse_network(ATLANTA_JSON).expect("bundled network")
}

/// The two demands of the two-link walkthrough (deadlines 8 and 11, released at 0).
pub fn two_link_demands(net: &Network) -> Vec<Demand> {
    parse_demands(EX1_DEMANDS_JSON, net).expect("bundled demands")
}

/// A star: branch `i` is a single edge `o{i} -> hub` with the given travel
/// bounds. Routes are named `B1..BL`.
pub fn star(
    branches: &[(Duration, Duration)],
    capacity: u32,
    service: Duration,
) -> Result<Network> {
    let mut b = Network::builder().node("hub", Some(capacity), service);
    for (i, &(lo, hi)) in branches.iter().enumerate() {
        let o = format!("o{}", i + 1);
        let e = format!("e{}", i + 1);
        b = b.node(&o, None, service).edge(&e, &o, "hub", lo, hi);
    }
    for i in 0..branches.len() {
        b = b.route(&format!("B{}", i + 1), &[&format!("e{}", i + 1)]);
    }
    b.build()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteCount {
    pub route: String,
    pub per_period: u32,
}

/// How a case bundle produces its demand list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// `h` demands per route spread evenly over each period:
    /// deadline `k` is `floor(P / (1 + h) * k + 1/2)` minutes.
    Periodic {
        period_min: Minutes,
        counts: Vec<RouteCount>,
        #[serde(default = "one")]
        periods: u32,
    },
    /// Random routes, releases drawn from fixed batch times, deadline =
    /// release + worst-case route time + uniform slack.
    Batched {
        count: usize,
        #[serde(default)]
        routes: Option<Vec<String>>,
        release_batches_min: Vec<Minutes>,
        slack_min: [Minutes; 2],
        resolution_min: Minutes,
    },
    /// Random routes with deadlines uniform on a range.
    UniformDeadlines {
        count: usize,
        #[serde(default)]
        routes: Option<Vec<String>>,
        deadline_min: [Minutes; 2],
        #[serde(default)]
        release_min: Option<Minutes>,
        resolution_min: Minutes,
    },
}

fn one() -> u32 {
    1
}

fn grid_sample(rng: &mut ChaCha8Rng, lo: i64, hi: i64, step: i64) -> Result<i64> {
    if step <= 0 || lo > hi {
        return Err(Error::Invalid(format!(
            "bad sampling range {lo}..{hi} step {step}"
        )));
    }
    let first = lo.div_euclid(step) + i64::from(lo.rem_euclid(step) != 0);
    let last = hi.div_euclid(step);
    if first > last {
        return Err(Error::Invalid(
            "sampling range contains no grid point".into(),
        ));
    }
    Ok(rng.gen_range(first..=last) * step)
}

fn route_pool(net: &Network, routes: &Option<Vec<String>>) -> Result<Vec<crate::model::RouteId>> {
    match routes {
        Some(names) if !names.is_empty() => names.iter().map(|n| net.route_id(n)).collect(),
        _ => Ok(net.route_ids().collect()),
    }
}

/// Deadline `k` of the periodic rule, in ticks, computed without rounding error.
pub fn periodic_deadline(period: Duration, h: u32, k: u32) -> TimePoint {
    let den = 2 * i64::from(1 + h) * TICKS_PER_MINUTE;
    let num = 2 * period.0 * i64::from(k) + i64::from(1 + h) * TICKS_PER_MINUTE;
    TimePoint(num.div_euclid(den) * TICKS_PER_MINUTE)
}

impl GeneratorSpec {
    pub fn parse(text: &str) -> Result<Self> {
        from_json(text)
    }

    /// Produces demands with ids `1..=n`. `seed` is ignored by the periodic rule.
    pub fn generate(&self, net: &Network, seed: u64) -> Result<Vec<Demand>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut raw: Vec<(TimePoint, TimePoint, crate::model::RouteId)> = Vec::new();
        match self {
            GeneratorSpec::Periodic {
                period_min,
                counts,
                periods,
            } => {
                if period_min.0 <= 0 {
                    return Err(Error::BadPeriod);
                }
                let period = Duration(period_min.0);
                let mut ordered = Vec::new();
                for c in counts {
                    let route = net.route_id(&c.route)?;
                    for q in 0..*periods {
                        for k in 1..=c.per_period {
                            let deadline = periodic_deadline(period, c.per_period, k)
                                + Duration(period.0 * i64::from(q));
                            ordered.push((TimePoint::NEG_INF, deadline, route));
                        }
                    }
                }
                return Ok(ordered
                    .into_iter()
                    .enumerate()
                    .map(|(i, (release, deadline, route))| Demand {
                        id: DemandId(i as u64 + 1),
                        route,
                        deadline,
                        release,
                    })
                    .collect());
            }
            GeneratorSpec::Batched {
                count,
                routes,
                release_batches_min,
                slack_min,
                resolution_min,
            } => {
                let pool = route_pool(net, routes)?;
                if release_batches_min.is_empty() {
                    return Err(Error::Invalid("no release batches".into()));
                }
                for _ in 0..*count {
                    let route = pool[rng.gen_range(0..pool.len())];
                    let release = TimePoint(
                        release_batches_min[rng.gen_range(0..release_batches_min.len())].0,
                    );
                    let slack =
                        grid_sample(&mut rng, slack_min[0].0, slack_min[1].0, resolution_min.0)?;
                    let deadline = release + net.route(route).max_total() + Duration(slack);
                    raw.push((release, deadline, route));
                }
            }
            GeneratorSpec::UniformDeadlines {
                count,
                routes,
                deadline_min,
                release_min,
                resolution_min,
            } => {
                let pool = route_pool(net, routes)?;
                let release = release_min
                    .map(|m| TimePoint(m.0))
                    .unwrap_or(TimePoint::NEG_INF);
                for _ in 0..*count {
                    let route = pool[rng.gen_range(0..pool.len())];
                    let deadline = TimePoint(grid_sample(
                        &mut rng,
                        deadline_min[0].0,
                        deadline_min[1].0,
                        resolution_min.0,
                    )?);
                    raw.push((release, deadline, route));
                }
            }
        }
        raw.sort_by_key(|&(release, deadline, route)| (release, deadline, route));
        Ok(raw
            .into_iter()
            .enumerate()
            .map(|(i, (release, deadline, route))| Demand {
                id: DemandId(i as u64 + 1),
                route,
                deadline,
                release,
            })
            .collect())
    }
}

/// The 27 static Atlanta demands, `[4, 4, 19]` over three hours.
pub fn atlanta_demands(net: &Network) -> Vec<Demand> {
    GeneratorSpec::parse(ATLANTA_GENERATOR_JSON)
        .and_then(|g| g.generate(net, 0))
        .expect("bundled generator")
}

/// 43 demands released in ten batches over two hours.
pub fn fig3_dynamic_demands(net: &Network, seed: u64) -> Vec<Demand> {
    GeneratorSpec::parse(FIG3_DYNAMIC_GENERATOR_JSON)
        .and_then(|g| g.generate(net, seed))
        .expect("bundled generator")
}

/// 200 demands known at time 0 with deadlines spread over 25 hours.
pub fn fig3_static200_demands(net: &Network, seed: u64) -> Vec<Demand> {
    GeneratorSpec::parse(FIG3_STATIC200_GENERATOR_JSON)
        .and_then(|g| g.generate(net, seed))
        .expect("bundled generator")
}

/// Where a reference number comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Published,
    Derived,
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedMetrics {
    pub metrics: Vec<Metric>,
}

impl ExpectedMetrics {
    /// Parses a sidecar; every metric must carry a `source`.
    pub fn parse(text: &str) -> Result<Self> {
        from_json(text)
    }

    pub fn get(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn value(&self, name: &str) -> f64 {
        self.get(name)
            .unwrap_or_else(|| panic!("metric `{name}` missing"))
            .value
    }

    pub fn by_name(&self) -> BTreeMap<&str, &Metric> {
        self.metrics.iter().map(|m| (m.name.as_str(), m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_networks_build() {
        assert_eq!(two_link().nodes().len(), 3);
        let f = fig3();
        assert_eq!((f.nodes().len(), f.routes().len()), (8, 4));
        let a = atlanta();
        assert_eq!(a.routes().len(), 3);
        let lb: Duration = a.routes().iter().map(|r| r.max_total()).sum();
        assert_eq!(lb, Duration::minutes(29 + 33 + 43));
    }

    #[test]
    fn atlanta_deadline_rule() {
        let net = atlanta();
        let demands = atlanta_demands(&net);
        assert_eq!(demands.len(), 27);
        let r1 = net.route_id("R1").unwrap();
        let r3 = net.route_id("R3").unwrap();
        let d1: Vec<i64> = demands
            .iter()
            .filter(|d| d.route == r1)
            .map(|d| d.deadline.0 / 1000)
            .collect();
        assert_eq!(d1, vec![36, 72, 108, 144]);
        let d3: Vec<i64> = demands
            .iter()
            .filter(|d| d.route == r3)
            .map(|d| d.deadline.0 / 1000)
            .collect();
        assert_eq!(d3, (1..=19).map(|k| 9 * k).collect::<Vec<_>>());
    }

    #[test]
    fn periodic_rule_rounds_half_up() {
        // 180 / 8 * 1 + 0.5 = 23.0 ; 180 / 8 * 3 + 0.5 = 68.0
        assert_eq!(
            periodic_deadline(Duration::minutes(180), 7, 1),
            TimePoint::minutes(23)
        );
        assert_eq!(
            periodic_deadline(Duration::minutes(180), 7, 3),
            TimePoint::minutes(68)
        );
        // 100 / 3 * 1 + 0.5 = 33.83
        assert_eq!(
            periodic_deadline(Duration::minutes(100), 2, 1),
            TimePoint::minutes(33)
        );
    }

    #[test]
    fn generators_are_seeded_and_sorted() {
        let net = fig3();
        let a = fig3_dynamic_demands(&net, 7);
        assert_eq!(a, fig3_dynamic_demands(&net, 7));
        assert_ne!(a, fig3_dynamic_demands(&net, 8));
        assert_eq!(a.len(), 43);
        assert!(a.windows(2).all(|w| w[0].release <= w[1].release));
        for d in &a {
            let slack = d.deadline - d.release - net.route(d.route).max_total();
            assert!(slack >= Duration::minutes(5) && slack <= Duration::minutes(40));
            assert_eq!(slack.0 % 100, 0);
        }
        let b = fig3_static200_demands(&net, 1);
        assert_eq!(b.len(), 200);
        assert!(b.iter().all(
            |d| d.deadline >= TimePoint::minutes(40) && d.deadline <= TimePoint::minutes(1540)
        ));
    }

    #[test]
    fn sidecars_carry_sources() {
        for text in [
            TWO_LINK_EXPECTED_JSON,
            FIG3_EXPECTED_JSON,
            ATLANTA_EXPECTED_JSON,
        ] {
            ExpectedMetrics::parse(text).unwrap();
        }
        let untagged = r#"{"metrics":[{"name":"x","value":1.0}]}"#;
        assert!(ExpectedMetrics::parse(untagged).is_err());
        let atl = ExpectedMetrics::parse(ATLANTA_EXPECTED_JSON).unwrap();
        assert_eq!(atl.value("optimal_sod_min"), 1587.0);
    }
}
