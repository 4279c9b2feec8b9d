//! Necessary conditions for a complete schedule of the pending demands.
//!
//! Both checks reason about worst-case windows of a schedule built at a
//! single instant. A dynamically updated schedule can still succeed where
//! they fail, so the verdicts are warnings and never grounds for dropping a
//! demand.

use std::fmt;

use num_traits::Zero;

use super::flow::{bottleneck_rate, BottleneckResult, FlowSolution};
use super::lp::{ratio, Q};
use crate::model::{Demand, Network, NodeId};
use crate::time::{Duration, TimePoint, TICKS_PER_MINUTE};

pub const QUALIFIER: &str = "worst-case static check for a complete schedule at this instant";

#[derive(Debug, Clone, PartialEq)]
pub struct NodeVerdict {
    pub node: NodeId,
    pub demands: usize,
    /// Sum of spans of the demands landing here.
    pub required: Duration,
    /// Capacity times the earliest-landing to latest-release window.
    pub available: i128,
    pub passes: bool,
    /// Capacity times `max deadline + service - now`.
    pub coarse_available: i128,
    pub coarse_passes: bool,
}

impl fmt::Display for NodeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node #{}: {} demands need {} spot-minutes, {} available: {} ({})",
            self.node.0,
            self.demands,
            self.required,
            Duration(self.available.clamp(i64::MIN as i128, i64::MAX as i128) as i64),
            if self.passes { "pass" } else { "fail" },
            QUALIFIER
        )
    }
}

/// Capacity checks per landing node over the pending demands.
pub fn check_node_necessary(net: &Network, demands: &[Demand], now: TimePoint) -> Vec<NodeVerdict> {
    let mut out = Vec::new();
    for v in net.node_ids() {
        let mut count = 0;
        let mut required = Duration::ZERO;
        let mut lo = i128::MAX;
        let mut hi = i128::MIN;
        let mut coarse_hi = i128::MIN;
        let w = net.node(v).service_time.0 as i128;
        for d in demands {
            let route = net.route(d.route);
            let Some(p) = route.position_of(v).filter(|&p| p >= 1) else {
                continue;
            };
            count += 1;
            required += route.span_from_origin(p);
            let earliest = now.max(d.release).0 as i128 + route.min_reach(p).0 as i128;
            let latest = (d.deadline - route.max_total() + route.max_reach(p)).0 as i128 + w;
            lo = lo.min(earliest);
            hi = hi.max(latest);
            coarse_hi = coarse_hi.max(d.deadline.0 as i128 + w);
        }
        if count == 0 {
            continue;
        }
        let c = net.capacity(v) as i128;
        let available = c * (hi - lo).max(0);
        let coarse_available = c * (coarse_hi - now.0 as i128).max(0);
        out.push(NodeVerdict {
            node: v,
            demands: count,
            required,
            available,
            passes: available >= required.0 as i128,
            coarse_available,
            coarse_passes: coarse_available >= required.0 as i128,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkVerdict {
    pub demands: usize,
    /// Latest departure over the pending demands minus `now`.
    pub horizon: Duration,
    /// Summed route caps over the bottleneck, per minute. `None` if unbounded.
    pub rate: Option<Q>,
    /// `horizon * rate` (vehicles). `None` if unbounded.
    pub bound: Option<Q>,
    pub passes: bool,
}

impl fmt::Display for NetworkVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bound = self
            .bound
            .as_ref()
            .map_or("unbounded".to_string(), |b| format!("{b}"));
        write!(
            f,
            "{} pending demands vs bottleneck bound {}: {} ({})",
            self.demands,
            bound,
            if self.passes { "pass" } else { "fail" },
            QUALIFIER
        )
    }
}

/// Compares the number of pending demands with what the bottleneck can
/// release before the latest permissible departure.
pub fn check_network_necessary(
    net: &Network,
    demands: &[Demand],
    now: TimePoint,
    flow: &FlowSolution,
    bottleneck: &BottleneckResult,
) -> NetworkVerdict {
    let latest = demands.iter().map(|d| d.latest_departure(net)).max();
    let horizon = latest
        .map_or(Duration::ZERO, |t| t - now)
        .max(Duration::ZERO);
    let rate = bottleneck_rate(net, flow, &bottleneck.nodes);
    let bound = match (&rate, now.is_finite()) {
        (Some(r), true) => Some(ratio(horizon.0, TICKS_PER_MINUTE) * r),
        _ => None,
    };
    let passes = demands.is_empty()
        || bound
            .as_ref()
            .is_none_or(|b| Q::from_integer((demands.len() as i64).into()) <= *b);
    NetworkVerdict {
        demands: demands.len(),
        horizon,
        rate,
        bound: bound.or_else(|| demands.is_empty().then(Q::zero)),
        passes,
    }
}
