use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RouteId(pub usize);

/// A vertiport or vertistop.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    /// Parking spots. `None` means unconstrained, which is only allowed for
    /// nodes no route lands at (pure origins).
    pub capacity: Option<u32>,
    pub service_time: Duration,
}

/// An airspace corridor with interval-bounded travel time.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub name: String,
    pub tail: NodeId,
    pub head: NodeId,
    pub min_time: Duration,
    pub max_time: Duration,
}

/// A sequence of connected edges. Positions follow the usual convention:
/// node 0 is the origin, edge `p` leads from node `p - 1` to node `p`, and
/// node `len()` is the destination.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub name: String,
    edges: Vec<EdgeId>,
    nodes: Vec<NodeId>,
    // prefix sums indexed by position, entry 0 is zero
    min_edge: Vec<Duration>,
    max_edge: Vec<Duration>,
    service: Vec<Duration>,
    service_at: Vec<Duration>,
}

impl Route {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    /// Node sequence, origin first.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn origin(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn destination(&self) -> NodeId {
        *self.nodes.last().expect("validated route")
    }

    pub fn node(&self, position: usize) -> NodeId {
        self.nodes[position]
    }

    /// Route position of `node`, if the route visits it.
    pub fn position_of(&self, node: NodeId) -> Option<usize> {
        self.nodes.iter().position(|&n| n == node)
    }

    pub fn visits(&self, node: NodeId) -> bool {
        self.nodes.contains(&node)
    }

    /// Ground service time at the node in `position`.
    pub fn service(&self, position: usize) -> Duration {
        self.service_at[position]
    }

    fn check_segment(&self, from: usize, to: usize) -> Result<()> {
        let len = self.len();
        for p in [from, to] {
            if p == 0 || p > len {
                return Err(Error::PositionOutOfRange { position: p, len });
            }
        }
        if from > to {
            return Err(Error::PositionOutOfRange {
                position: from,
                len: to,
            });
        }
        Ok(())
    }

    fn intermediate_service(&self, from: usize, to: usize) -> Duration {
        // service at positions from..to-1
        self.service[to - 1] - self.service[from - 1]
    }

    /// Shortest time from departing node `from - 1` to landing at node `to`.
    pub fn min_travel(&self, from: usize, to: usize) -> Result<Duration> {
        self.check_segment(from, to)?;
        Ok(self.min_edge[to] - self.min_edge[from - 1] + self.intermediate_service(from, to))
    }

    /// Longest time from departing node `from - 1` to landing at node `to`.
    pub fn max_travel(&self, from: usize, to: usize) -> Result<Duration> {
        self.check_segment(from, to)?;
        Ok(self.max_edge[to] - self.max_edge[from - 1] + self.intermediate_service(from, to))
    }

    /// Length of the window a vehicle may block a spot at node `to` when it
    /// departs node `from - 1`: accumulated uncertainty plus service time.
    pub fn span(&self, from: usize, to: usize) -> Result<Duration> {
        self.check_segment(from, to)?;
        let uncertainty = (self.max_edge[to] - self.max_edge[from - 1])
            - (self.min_edge[to] - self.min_edge[from - 1]);
        Ok(uncertainty + self.service_at[to])
    }

    /// `min_travel(1, position)` with position 0 mapping to zero. Infallible
    /// for valid positions.
    pub fn min_reach(&self, position: usize) -> Duration {
        if position == 0 {
            Duration::ZERO
        } else {
            self.min_edge[position] + self.service[position - 1]
        }
    }

    pub fn max_reach(&self, position: usize) -> Duration {
        if position == 0 {
            Duration::ZERO
        } else {
            self.max_edge[position] + self.service[position - 1]
        }
    }

    /// Span measured from the origin.
    pub fn span_from_origin(&self, position: usize) -> Duration {
        self.max_edge[position] - self.min_edge[position] + self.service_at[position]
    }

    /// Worst-case origin-to-destination time.
    pub fn max_total(&self) -> Duration {
        self.max_reach(self.len())
    }

    pub fn min_total(&self) -> Duration {
        self.min_reach(self.len())
    }
}

/// A validated capacitated DAG with routes.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    routes: Vec<Route>,
    node_index: HashMap<String, NodeId>,
    edge_index: HashMap<String, EdgeId>,
    route_index: HashMap<String, RouteId>,
    is_source: Vec<bool>,
    is_sink: Vec<bool>,
}

#[derive(Debug, Clone, Default)]
pub struct NetworkBuilder {
    nodes: Vec<Node>,
    edges: Vec<(String, String, String, Duration, Duration)>,
    routes: Vec<(String, Vec<String>)>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, name: &str, capacity: Option<u32>, service_time: Duration) -> Self {
        self.nodes.push(Node {
            name: name.to_string(),
            capacity,
            service_time,
        });
        self
    }

    pub fn edge(
        mut self,
        name: &str,
        tail: &str,
        head: &str,
        min: Duration,
        max: Duration,
    ) -> Self {
        self.edges
            .push((name.into(), tail.into(), head.into(), min, max));
        self
    }

    pub fn route(mut self, name: &str, edges: &[&str]) -> Self {
        self.routes
            .push((name.into(), edges.iter().map(|e| e.to_string()).collect()));
        self
    }

    pub fn build(self) -> Result<Network> {
        let mut node_index = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.service_time < Duration::ZERO {
                return Err(Error::BadServiceTime(n.name.clone()));
            }
            if node_index.insert(n.name.clone(), NodeId(i)).is_some() {
                return Err(Error::Duplicate {
                    kind: "node",
                    id: n.name.clone(),
                });
            }
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut edge_index = HashMap::new();
        for (name, tail, head, min, max) in self.edges {
            let tail = *node_index.get(&tail).ok_or(Error::UnknownNode(tail))?;
            let head = *node_index.get(&head).ok_or(Error::UnknownNode(head))?;
            if min <= Duration::ZERO || min > max {
                return Err(Error::BadTravelTime {
                    edge: name,
                    min: min.to_string(),
                    max: max.to_string(),
                });
            }
            if edge_index
                .insert(name.clone(), EdgeId(edges.len()))
                .is_some()
            {
                return Err(Error::Duplicate {
                    kind: "edge",
                    id: name,
                });
            }
            edges.push(Edge {
                name,
                tail,
                head,
                min_time: min,
                max_time: max,
            });
        }

        let n = self.nodes.len();
        let mut is_source = vec![true; n];
        let mut is_sink = vec![true; n];
        for e in &edges {
            is_source[e.head.0] = false;
            is_sink[e.tail.0] = false;
        }
        if let Some(i) = (0..n).find(|&i| is_source[i] && is_sink[i]) {
            return Err(Error::IsolatedNode(self.nodes[i].name.clone()));
        }
        check_acyclic(&self.nodes, &edges)?;

        let mut routes = Vec::with_capacity(self.routes.len());
        let mut route_index = HashMap::new();
        for (name, edge_names) in self.routes {
            if edge_names.is_empty() {
                return Err(Error::EmptyRoute(name));
            }
            let ids = edge_names
                .iter()
                .map(|e| {
                    edge_index
                        .get(e)
                        .copied()
                        .ok_or_else(|| Error::UnknownEdge(e.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut nodes = vec![edges[ids[0].0].tail];
            for w in 0..ids.len() {
                let e = &edges[ids[w].0];
                if e.tail != *nodes.last().unwrap() {
                    return Err(Error::DisconnectedRoute {
                        route: name,
                        from: edges[ids[w - 1].0].name.clone(),
                        to: e.name.clone(),
                    });
                }
                if nodes.contains(&e.head) {
                    return Err(Error::RepeatedNode {
                        route: name,
                        node: self.nodes[e.head.0].name.clone(),
                    });
                }
                nodes.push(e.head);
            }
            for &v in &nodes[1..] {
                if self.nodes[v.0].capacity.is_none() {
                    return Err(Error::MissingCapacity {
                        node: self.nodes[v.0].name.clone(),
                        route: name,
                    });
                }
            }
            let k = ids.len();
            let mut min_edge = vec![Duration::ZERO; k + 1];
            let mut max_edge = vec![Duration::ZERO; k + 1];
            let mut service = vec![Duration::ZERO; k + 1];
            let mut service_at = vec![Duration::ZERO; k + 1];
            for p in 1..=k {
                let e = &edges[ids[p - 1].0];
                min_edge[p] = min_edge[p - 1] + e.min_time;
                max_edge[p] = max_edge[p - 1] + e.max_time;
                service_at[p] = self.nodes[nodes[p].0].service_time;
                service[p] = service[p - 1] + service_at[p];
            }
            if route_index
                .insert(name.clone(), RouteId(routes.len()))
                .is_some()
            {
                return Err(Error::Duplicate {
                    kind: "route",
                    id: name,
                });
            }
            routes.push(Route {
                name,
                edges: ids,
                nodes,
                min_edge,
                max_edge,
                service,
                service_at,
            });
        }

        Ok(Network {
            nodes: self.nodes,
            edges,
            routes,
            node_index,
            edge_index,
            route_index,
            is_source,
            is_sink,
        })
    }
}

fn check_acyclic(nodes: &[Node], edges: &[Edge]) -> Result<()> {
    let n = nodes.len();
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in edges {
        indegree[e.head.0] += 1;
        out[e.tail.0].push(e.head.0);
    }
    let mut stack: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &w in &out[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                stack.push(w);
            }
        }
    }
    if seen < n {
        let v = (0..n).find(|&i| indegree[i] > 0).unwrap();
        return Err(Error::Cyclic(nodes[v].name.clone()));
    }
    Ok(())
}

impl Network {
    pub fn builder() -> NetworkBuilder {
        NetworkBuilder::new()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn route(&self, id: RouteId) -> &Route {
        &self.routes[id.0]
    }

    pub fn node_id(&self, name: &str) -> Result<NodeId> {
        self.node_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.into()))
    }

    pub fn edge_id(&self, name: &str) -> Result<EdgeId> {
        self.edge_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(name.into()))
    }

    pub fn route_id(&self, name: &str) -> Result<RouteId> {
        self.route_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownRoute(name.into()))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn route_ids(&self) -> impl Iterator<Item = RouteId> {
        (0..self.routes.len()).map(RouteId)
    }

    /// Capacity of a node routes land at. Pure origins report `u32::MAX`.
    pub fn capacity(&self, id: NodeId) -> u32 {
        self.nodes[id.0].capacity.unwrap_or(u32::MAX)
    }

    pub fn is_source(&self, id: NodeId) -> bool {
        self.is_source[id.0]
    }

    pub fn is_sink(&self, id: NodeId) -> bool {
        self.is_sink[id.0]
    }

    pub fn sources(&self) -> Vec<NodeId> {
        self.node_ids().filter(|&v| self.is_source(v)).collect()
    }

    pub fn sinks(&self) -> Vec<NodeId> {
        self.node_ids().filter(|&v| self.is_sink(v)).collect()
    }

    /// Whether any source still reaches any sink once every edge touching a
    /// node in `removed` is dropped.
    pub fn sources_reach_sinks_without(&self, removed: &[NodeId]) -> bool {
        let n = self.nodes.len();
        let mut cut = vec![false; n];
        for v in removed {
            cut[v.0] = true;
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            if !cut[e.tail.0] && !cut[e.head.0] {
                out[e.tail.0].push(e.head.0);
            }
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| self.is_source[i]).collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            if self.is_sink[v] {
                return true;
            }
            for &w in &out[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }
}
