//! Event-triggered scheduling: gap insertion, schedule preparation and the
//! branch-and-bound search, plus a brute-force oracle for small instances.

pub mod bnb;
pub mod event;
pub mod insertion;
pub mod oracle;
pub mod prepare;
pub mod table;

pub use bnb::{bnb_schedule, BnbConfig, BnbResult, Branch, Budget, Problem, Rules, SearchStats};
pub use event::{event_scheduler, Decision, SchedulerConfig, SchedulerState};
pub use insertion::{gap_insert, insertion, InsertionOutcome};
pub use oracle::{oracle_optimal, ORACLE_MAX_DEMANDS};
pub use prepare::{assign_spots, expand_branch, prepare_schedule, Prepared, SpotRequest};
pub use table::{BlockTable, Reservation};
