//! Throughput bounds and feasibility conditions.

pub mod conditions;
pub mod counters;
pub mod flow;
pub mod lp;
pub mod star;

pub use conditions::{
    check_network_necessary, check_node_necessary, NetworkVerdict, NodeVerdict, QUALIFIER,
};
pub use counters::{cumulative_arrivals, cumulative_departures, flow_rate, CounterQuery};
pub use flow::{compute_bottleneck, max_flow, BindingRule, BottleneckResult, FlowSolution};
pub use lp::{q, ratio, to_f64, Q};
pub use star::{
    demand_rate, max_backlog, star_backlog_series, star_feasibility, PeriodicDemandSpec, Star,
    StarVerdict,
};
