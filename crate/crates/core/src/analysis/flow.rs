//! Route-level maximizing flows and bottleneck node sets.
//!
//! Conservation along a route leaves one rate `z_R` per route. The
//! constraints are `z_R <= C_v / m^R_v` at every landing node of `R` and
//! `sum_R z_R * m^R_v <= C_v` per node, with `m^R_v` the span from the
//! origin. Rates are vehicles per minute.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::lp::{q, ratio, LinearProgram, Q};
use crate::error::{Error, Result};
use crate::model::{EdgeId, Network, NodeId, RouteId};
use crate::time::TICKS_PER_MINUTE;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    /// One rate per route, indexed by `RouteId`.
    pub route_flow: Vec<Q>,
    /// `C_v / m^R_v` for every landing node of every route; `None` when the
    /// span is zero and the cap is unbounded.
    pub caps: BTreeMap<(RouteId, NodeId), Option<Q>>,
    pub objective: Q,
    /// Route/node pairs whose cap is met by this flow.
    pub binding: BTreeSet<(RouteId, NodeId)>,
    /// Nodes whose aggregate constraint is tight in this flow.
    pub saturated: BTreeSet<NodeId>,
}

impl FlowSolution {
    /// Flow of route `r` through `v` (zero off the route).
    pub fn flow(&self, net: &Network, r: RouteId, v: NodeId) -> Q {
        if net.route(r).visits(v) {
            self.route_flow[r.0].clone()
        } else {
            Q::zero()
        }
    }

    pub fn cap(&self, r: RouteId, v: NodeId) -> Option<&Q> {
        self.caps.get(&(r, v)).and_then(|c| c.as_ref())
    }
}

fn minutes_q(ticks: i64) -> Q {
    ratio(ticks, TICKS_PER_MINUTE)
}

/// Landing positions `(route, node, span)` grouped by node.
fn landings(net: &Network) -> BTreeMap<NodeId, Vec<(RouteId, i64)>> {
    let mut out: BTreeMap<NodeId, Vec<(RouteId, i64)>> = BTreeMap::new();
    for r in net.route_ids() {
        let route = net.route(r);
        for p in 1..=route.len() {
            out.entry(route.node(p))
                .or_default()
                .push((r, route.span_from_origin(p).0));
        }
    }
    out
}

fn caps(net: &Network) -> BTreeMap<(RouteId, NodeId), Option<Q>> {
    let mut caps = BTreeMap::new();
    for (v, list) in landings(net) {
        let c = net.capacity(v) as i64;
        for (r, m) in list {
            let cap = if c == 0 {
                Some(Q::zero())
            } else if m == 0 {
                None
            } else {
                Some(ratio(c * TICKS_PER_MINUTE, m))
            };
            caps.insert((r, v), cap);
        }
    }
    caps
}

/// The flow program with an arbitrary objective over route rates.
pub fn flow_program(net: &Network, objective: Vec<Q>) -> LinearProgram {
    let n = net.routes().len();
    let mut lp = LinearProgram::new(objective);
    for ((r, _), cap) in caps(net) {
        if let Some(cap) = cap {
            let mut row = vec![Q::zero(); n];
            row[r.0] = Q::one();
            lp.le(row, cap);
        }
    }
    for (v, list) in landings(net) {
        let mut row = vec![Q::zero(); n];
        for (r, m) in list {
            row[r.0] += minutes_q(m);
        }
        lp.le(row, q(net.capacity(v) as i64));
    }
    lp
}

fn unit_objective(n: usize) -> Vec<Q> {
    vec![Q::one(); n]
}

/// Exact maximizing flow.
pub fn max_flow(net: &Network) -> Result<FlowSolution> {
    let n = net.routes().len();
    let sol = flow_program(net, unit_objective(n)).maximize()?;
    Ok(describe(net, sol.x))
}

/// Fills in caps, binding pairs and saturated nodes for route rates `z`.
pub fn describe(net: &Network, z: Vec<Q>) -> FlowSolution {
    let caps = caps(net);
    let binding = caps
        .iter()
        .filter(|(&(r, _), cap)| cap.as_ref().is_some_and(|c| *c == z[r.0]))
        .map(|(&k, _)| k)
        .collect();
    let saturated = landings(net)
        .into_iter()
        .filter(|(v, list)| {
            let load: Q = list.iter().map(|&(r, m)| &z[r.0] * minutes_q(m)).sum();
            load == q(net.capacity(*v) as i64)
        })
        .map(|(v, _)| v)
        .collect();
    let objective = z.iter().sum();
    FlowSolution {
        route_flow: z,
        caps,
        objective,
        binding,
        saturated,
    }
}

/// Which property ties a route to a bottleneck node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingRule {
    /// Some maximizing flow meets the route cap `C_v / m^R_v` at the node.
    RouteCap,
    /// Some maximizing flow saturates the node's aggregate capacity.
    NodeSaturation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckResult {
    pub nodes: Vec<NodeId>,
    /// One node per route where the binding rule holds.
    pub witness: BTreeMap<RouteId, NodeId>,
    /// Edges touching a bottleneck node; removing them separates sources from sinks.
    pub cut_edges: Vec<EdgeId>,
    pub rule: BindingRule,
    /// Per route, every node where the binding rule can hold.
    pub candidates: BTreeMap<RouteId, BTreeSet<NodeId>>,
}

/// Per-route nodes at which some maximizing flow binds under `rule`.
pub fn binding_candidates(
    net: &Network,
    flow: &FlowSolution,
    rule: BindingRule,
) -> Result<BTreeMap<RouteId, BTreeSet<NodeId>>> {
    let n = net.routes().len();
    let optimal_face = |objective: Vec<Q>| -> Result<Q> {
        let mut lp = flow_program(net, objective);
        lp.ge(unit_objective(n), flow.objective.clone());
        Ok(lp.maximize()?.value)
    };
    let mut out = BTreeMap::new();
    match rule {
        BindingRule::RouteCap => {
            for r in net.route_ids() {
                let route = net.route(r);
                let route_caps: Vec<(NodeId, &Q)> = (1..=route.len())
                    .filter_map(|p| flow.cap(r, route.node(p)).map(|c| (route.node(p), c)))
                    .collect();
                let mut set = BTreeSet::new();
                if let Some(min) = route_caps.iter().map(|&(_, c)| c).min() {
                    let mut e = vec![Q::zero(); n];
                    e[r.0] = Q::one();
                    if optimal_face(e)? == *min {
                        set.extend(
                            route_caps
                                .iter()
                                .filter(|&&(_, c)| c == min)
                                .map(|&(v, _)| v),
                        );
                    }
                }
                out.insert(r, set);
            }
        }
        BindingRule::NodeSaturation => {
            let mut saturable = BTreeSet::new();
            for (v, list) in landings(net) {
                let mut obj = vec![Q::zero(); n];
                for (r, m) in list {
                    obj[r.0] += minutes_q(m);
                }
                if optimal_face(obj)? == q(net.capacity(v) as i64) {
                    saturable.insert(v);
                }
            }
            for r in net.route_ids() {
                let route = net.route(r);
                let set = (1..=route.len())
                    .map(|p| route.node(p))
                    .filter(|v| saturable.contains(v))
                    .collect();
                out.insert(r, set);
            }
        }
    }
    Ok(out)
}

/// Whether `nodes` has a candidate on every route and separates all sources from all sinks.
pub fn qualifies(
    net: &Network,
    candidates: &BTreeMap<RouteId, BTreeSet<NodeId>>,
    nodes: &[NodeId],
) -> bool {
    candidates
        .values()
        .all(|set| nodes.iter().any(|v| set.contains(v)))
        && !net.sources_reach_sinks_without(nodes)
}

fn select(net: &Network, candidates: &BTreeMap<RouteId, BTreeSet<NodeId>>) -> Option<Vec<NodeId>> {
    if candidates.values().any(|s| s.is_empty()) {
        return None;
    }
    let mut chosen: BTreeSet<NodeId> = candidates.values().flatten().copied().collect();
    for v in net.node_ids() {
        if !net.sources_reach_sinks_without(&chosen.iter().copied().collect::<Vec<_>>()) {
            break;
        }
        chosen.insert(v);
    }
    let mut nodes: Vec<NodeId> = chosen.into_iter().collect();
    for v in nodes.clone().into_iter().rev() {
        let trial: Vec<NodeId> = nodes.iter().copied().filter(|&u| u != v).collect();
        if qualifies(net, candidates, &trial) {
            nodes = trial;
        }
    }
    Some(nodes)
}

/// Bottleneck set: binding nodes collected per route, padded until sources
/// and sinks are separated, then shrunk greedily from the highest node index.
/// Tries route caps first and falls back to node saturation.
pub fn compute_bottleneck(net: &Network, flow: &FlowSolution) -> Result<BottleneckResult> {
    for rule in [BindingRule::RouteCap, BindingRule::NodeSaturation] {
        let candidates = binding_candidates(net, flow, rule)?;
        if let Some(nodes) = select(net, &candidates) {
            let witness = candidates
                .iter()
                .map(|(&r, set)| {
                    (
                        r,
                        *nodes
                            .iter()
                            .find(|v| set.contains(v))
                            .expect("qualifying set"),
                    )
                })
                .collect();
            let cut_edges = net
                .edges()
                .iter()
                .enumerate()
                .filter(|(_, e)| nodes.contains(&e.tail) || nodes.contains(&e.head))
                .map(|(i, _)| EdgeId(i))
                .collect();
            return Ok(BottleneckResult {
                nodes,
                witness,
                cut_edges,
                rule,
                candidates,
            });
        }
    }
    Err(Error::NoBottleneck(
        "some route never binds in any maximizing flow".into(),
    ))
}

/// Every qualifying node set of minimum size, by exhaustive search.
pub fn exhaustive_bottlenecks(
    net: &Network,
    candidates: &BTreeMap<RouteId, BTreeSet<NodeId>>,
) -> Vec<Vec<NodeId>> {
    let n = net.nodes().len();
    assert!(n <= 20, "exhaustive search is limited to 20 nodes");
    let mut by_size: Vec<Vec<Vec<NodeId>>> = vec![Vec::new(); n + 1];
    for mask in 0u32..(1 << n) {
        let nodes: Vec<NodeId> = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(NodeId)
            .collect();
        if qualifies(net, candidates, &nodes) {
            by_size[nodes.len()].push(nodes);
        }
    }
    by_size
        .into_iter()
        .find(|s| !s.is_empty())
        .unwrap_or_default()
}

/// Aggregate bottleneck rate `sum_{v in V} sum_{R through v} C_v / m^R_v`.
pub fn bottleneck_rate(net: &Network, flow: &FlowSolution, nodes: &[NodeId]) -> Option<Q> {
    let mut total = Q::zero();
    for &v in nodes {
        for r in net.route_ids() {
            if net.route(r).position_of(v).is_some_and(|p| p >= 1) {
                total += flow.cap(r, v)?.clone();
            }
        }
    }
    Some(total)
}
