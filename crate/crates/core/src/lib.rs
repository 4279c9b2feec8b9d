//! Scheduling for capacity-constrained urban air mobility networks with
//! interval-bounded travel times.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: networks, demands, journeys and the timing formulas
//! * [`analysis`]: flow bounds, bottlenecks and necessary conditions
//! * [`scheduler`]: event-triggered insertion backed by branch and bound
//! * [`simulator`]: seeded discrete-event runs with realized travel times
//!
//! Time is kept in integer ticks of 1/1000 minute ([`time`]).

pub mod analysis;
pub mod cases;
pub mod error;
pub mod io;
pub mod model;
pub mod scheduler;
pub mod simulator;
pub mod time;

pub use error::{Error, Result};
pub use model::{Demand, DemandId, Journey, Network, NodeId, RouteId, Schedule};
pub use time::{Duration, Interval, TimePoint};
