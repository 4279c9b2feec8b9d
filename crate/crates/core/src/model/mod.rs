//! Networks, demands, journeys and the per-journey timing formulas.

pub mod audit;
pub mod demand;
pub mod formulas;
pub mod network;

pub use audit::{
    audit_node, audit_schedule, capacity_excess, occupancy_by_node, AuditReport, Information,
    Occupancy, Violation,
};
pub use demand::{Demand, DemandId, Journey, Schedule};
pub use formulas::{
    blocking_interval, current_interval, current_intervals, current_latest_arrival, latest_arrival,
    latest_feasible_times, m_span, sod_cost, sod_lower_bound, static_intervals, travel_bounds,
};
pub use network::{Edge, EdgeId, Network, NetworkBuilder, Node, NodeId, Route, RouteId};
