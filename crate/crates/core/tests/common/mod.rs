#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uamsched::model::sod_lower_bound;
use uamsched::scheduler::{BnbConfig, Budget, SchedulerConfig};
use uamsched::{Demand, Duration, Network, Schedule, TimePoint};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` demands on random routes, deadline = release + worst-case route time
/// + whole-minute slack in `[0, slack_max]`.
pub fn random_demands(
    net: &Network,
    rng: &mut ChaCha8Rng,
    n: usize,
    release: TimePoint,
    slack_max: i64,
) -> Vec<Demand> {
    let routes: Vec<_> = net.route_ids().collect();
    (0..n)
        .map(|i| {
            let r = routes[rng.gen_range(0..routes.len())];
            let slack = Duration::minutes(rng.gen_range(0..=slack_max));
            let base = if release.is_finite() {
                release
            } else {
                TimePoint::ZERO
            };
            Demand::new(i as u64 + 1, r, base + net.route(r).max_total() + slack)
                .released_at(release)
        })
        .collect()
}

/// Bound over the demands that made it into the schedule.
pub fn scheduled_bound(net: &Network, demands: &[Demand], schedule: &Schedule) -> Duration {
    sod_lower_bound(net, demands.iter().filter(|d| schedule.contains(d.id)))
}

pub fn node_budget(nodes: u64) -> SchedulerConfig {
    SchedulerConfig {
        bnb: BnbConfig {
            budget: Budget::Nodes(nodes),
            ..BnbConfig::default()
        },
        ..SchedulerConfig::default()
    }
}

pub fn networks() -> Vec<(&'static str, Network)> {
    vec![
        ("two_link", uamsched::cases::two_link()),
        ("fig3", uamsched::cases::fig3()),
        ("atlanta", uamsched::cases::atlanta()),
    ]
}
