//! The event-triggered outer loop: batch the earliest-deadline eligible
//! demands and shrink the batch until insertion succeeds.

use std::time::Instant;

use super::bnb::{BnbConfig, SearchStats};
use super::insertion::insertion;
use crate::error::{Error, Result};
use crate::model::{Demand, DemandId, Network, Schedule};
use crate::time::TimePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchedulerConfig {
    /// Largest batch handed to insertion at one event.
    pub k0: usize,
    pub bnb: BnbConfig,
    /// Start every event from the whole eligible set instead of at most `k0`.
    pub literal_max: bool,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            k0: 32,
            bnb: BnbConfig::default(),
            literal_max: false,
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k0 == 0 {
            return Err(Error::Invalid("k0 must be at least 1".into()));
        }
        Ok(())
    }
}

/// What happened at one scheduling event.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub time: TimePoint,
    pub scheduled: Vec<DemandId>,
    pub dropped: Vec<DemandId>,
    /// Batch sizes tried, in order.
    pub attempts: Vec<usize>,
    pub searches: Vec<SearchStats>,
    pub wall: std::time::Duration,
}

/// Scheduler state carried between events.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchedulerState {
    pub schedule: Schedule,
    /// Known demands that have no departure yet.
    pub pending: Vec<Demand>,
    pub dropped: Vec<Demand>,
    pub decisions: Vec<Decision>,
}

impl SchedulerState {
    pub fn new() -> Self {
        SchedulerState::default()
    }

    /// Adds demands to the pending set.
    pub fn submit(&mut self, demands: impl IntoIterator<Item = Demand>) -> Result<()> {
        for d in demands {
            if self.schedule.contains(d.id)
                || self
                    .pending
                    .iter()
                    .chain(&self.dropped)
                    .any(|p| p.id == d.id)
            {
                return Err(Error::Duplicate {
                    kind: "demand",
                    id: d.id.to_string(),
                });
            }
            self.pending.push(d);
        }
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.pending.is_empty() && self.dropped.is_empty()
    }
}

/// Handles one event at `now`: drops pending demands that can no longer
/// meet their deadline, then schedules as many of the earliest-deadline
/// released demands as insertion admits. Committed departures never change
/// and new ones are never before `now`.
pub fn event_scheduler(
    net: &Network,
    state: &mut SchedulerState,
    now: TimePoint,
    cfg: &SchedulerConfig,
) -> Result<Decision> {
    cfg.validate()?;
    let start = Instant::now();
    let mut decision = Decision {
        time: now,
        scheduled: Vec::new(),
        dropped: Vec::new(),
        attempts: Vec::new(),
        searches: Vec::new(),
        wall: std::time::Duration::ZERO,
    };
    if now.is_finite() {
        let (lost, keep): (Vec<Demand>, Vec<Demand>) = std::mem::take(&mut state.pending)
            .into_iter()
            .partition(|d| !d.reachable_from(net, now));
        state.pending = keep;
        decision.dropped = lost.iter().map(|d| d.id).collect();
        state.dropped.extend(lost);
    }
    let mut eligible: Vec<Demand> = state
        .pending
        .iter()
        .filter(|d| d.release <= now)
        .cloned()
        .collect();
    eligible.sort_by_key(|d| (d.deadline, d.id));
    let mut k = if cfg.literal_max {
        eligible.len()
    } else {
        cfg.k0.min(eligible.len())
    };
    while k > 0 {
        decision.attempts.push(k);
        let outcome = insertion(net, &eligible[..k], &state.schedule, now, &cfg.bnb)?;
        decision.searches.extend(outcome.searches);
        if let Some(journeys) = outcome.journeys {
            for j in journeys {
                decision.scheduled.push(j.demand);
                state.schedule.insert(j);
            }
            state.pending.retain(|d| !state.schedule.contains(d.id));
            break;
        }
        k -= 1;
    }
    decision.scheduled.sort();
    decision.wall = start.elapsed();
    state.decisions.push(decision.clone());
    Ok(decision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::scheduler::bnb::Budget;

    fn t(m: i64) -> TimePoint {
        TimePoint::minutes(m)
    }

    #[test]
    fn example_one_trace() {
        let net = cases::two_link();
        let cfg = SchedulerConfig {
            bnb: BnbConfig {
                budget: Budget::Exhaustive,
                ..BnbConfig::default()
            },
            ..SchedulerConfig::default()
        };
        let mut state = SchedulerState::new();
        state.submit(cases::two_link_demands(&net)).unwrap();
        let first = event_scheduler(&net, &mut state, t(0), &cfg).unwrap();
        assert_eq!(first.scheduled, vec![DemandId(1)]);
        assert_eq!(first.attempts, vec![2, 1]);
        assert_eq!(state.schedule.get(DemandId(1)).unwrap().departure, t(0));

        state
            .schedule
            .get_mut(DemandId(1))
            .unwrap()
            .record_arrival(&net, t(2))
            .unwrap();
        let second = event_scheduler(&net, &mut state, t(2), &cfg).unwrap();
        assert_eq!(second.scheduled, vec![DemandId(2)]);
        assert_eq!(state.schedule.get(DemandId(2)).unwrap().departure, t(3));
        assert!(state.is_complete());
    }

    #[test]
    fn nothing_eligible() {
        let net = cases::two_link();
        let mut state = SchedulerState::new();
        let d = event_scheduler(&net, &mut state, t(0), &SchedulerConfig::default()).unwrap();
        assert!(d.scheduled.is_empty() && d.attempts.is_empty());
        assert!(state.schedule.is_empty());
    }

    #[test]
    fn unreachable_demands_are_dropped() {
        let net = cases::two_link();
        let r = net.route_id("R").unwrap();
        let mut state = SchedulerState::new();
        state.submit([Demand::new(1, r, t(8))]).unwrap();
        let d = event_scheduler(&net, &mut state, t(1), &SchedulerConfig::default()).unwrap();
        assert_eq!(d.dropped, vec![DemandId(1)]);
        assert!(state.pending.is_empty());
        assert!(state.submit([Demand::new(1, r, t(8))]).is_err());
    }
}
