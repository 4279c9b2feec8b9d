//! Integer time arithmetic.
//!
//! All times are counted in ticks of 1/1000 minute so that interval overlap
//! tests are exact.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Ticks per minute.
pub const TICKS_PER_MINUTE: i64 = 1000;

/// An absolute instant, in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimePoint(pub i64);

/// A signed length of time, in ticks.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Duration(pub i64);

impl TimePoint {
    /// Stand-in for "no lower bound" (static scheduling without causality).
    /// Far enough from `i64::MIN` that adding route-scale durations never overflows.
    pub const NEG_INF: TimePoint = TimePoint(i64::MIN / 8);
    /// Stand-in for "no upper bound".
    pub const POS_INF: TimePoint = TimePoint(i64::MAX / 8);
    pub const ZERO: TimePoint = TimePoint(0);

    pub fn ticks(self) -> i64 {
        self.0
    }

    pub fn from_minutes(minutes: f64) -> Result<Self, Error> {
        minutes_to_ticks(minutes).map(TimePoint)
    }

    /// Whole minutes, exact.
    pub fn minutes(m: i64) -> Self {
        TimePoint(m * TICKS_PER_MINUTE)
    }

    pub fn as_minutes(self) -> f64 {
        self.0 as f64 / TICKS_PER_MINUTE as f64
    }

    pub fn is_finite(self) -> bool {
        self > TimePoint::NEG_INF && self < TimePoint::POS_INF
    }
}

impl Duration {
    pub const ZERO: Duration = Duration(0);

    pub fn ticks(self) -> i64 {
        self.0
    }

    pub fn from_minutes(minutes: f64) -> Result<Self, Error> {
        minutes_to_ticks(minutes).map(Duration)
    }

    pub fn minutes(m: i64) -> Self {
        Duration(m * TICKS_PER_MINUTE)
    }

    pub fn as_minutes(self) -> f64 {
        self.0 as f64 / TICKS_PER_MINUTE as f64
    }
}

/// Converts a minute value to ticks, rejecting anything off the 1/1000 grid.
pub fn minutes_to_ticks(minutes: f64) -> Result<i64, Error> {
    if !minutes.is_finite() {
        return Err(Error::Unrepresentable(minutes));
    }
    let scaled = minutes * TICKS_PER_MINUTE as f64;
    let rounded = scaled.round();
    if rounded.abs() > 1e15 || (scaled - rounded).abs() > 1e-6 * rounded.abs().max(1.0) {
        return Err(Error::Unrepresentable(minutes));
    }
    Ok(rounded as i64)
}

/// Formats ticks as minutes with exactly three decimals (lossless on the tick grid).
pub fn format_minutes(ticks: i64) -> String {
    let sign = if ticks < 0 { "-" } else { "" };
    let abs = ticks.unsigned_abs();
    format!(
        "{sign}{}.{:03}",
        abs / TICKS_PER_MINUTE as u64,
        abs % TICKS_PER_MINUTE as u64
    )
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self <= TimePoint::NEG_INF {
            f.write_str("-inf")
        } else if *self >= TimePoint::POS_INF {
            f.write_str("+inf")
        } else {
            f.write_str(&format_minutes(self.0))
        }
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_minutes(self.0))
    }
}

impl Add<Duration> for TimePoint {
    type Output = TimePoint;
    fn add(self, rhs: Duration) -> TimePoint {
        TimePoint(self.0 + rhs.0)
    }
}

impl AddAssign<Duration> for TimePoint {
    fn add_assign(&mut self, rhs: Duration) {
        self.0 += rhs.0;
    }
}

impl Sub<Duration> for TimePoint {
    type Output = TimePoint;
    fn sub(self, rhs: Duration) -> TimePoint {
        TimePoint(self.0 - rhs.0)
    }
}

impl SubAssign<Duration> for TimePoint {
    fn sub_assign(&mut self, rhs: Duration) {
        self.0 -= rhs.0;
    }
}

impl Sub for TimePoint {
    type Output = Duration;
    fn sub(self, rhs: TimePoint) -> Duration {
        Duration(self.0 - rhs.0)
    }
}

impl Add for Duration {
    type Output = Duration;
    fn add(self, rhs: Duration) -> Duration {
        Duration(self.0 + rhs.0)
    }
}

impl AddAssign for Duration {
    fn add_assign(&mut self, rhs: Duration) {
        self.0 += rhs.0;
    }
}

impl Sub for Duration {
    type Output = Duration;
    fn sub(self, rhs: Duration) -> Duration {
        Duration(self.0 - rhs.0)
    }
}

impl Neg for Duration {
    type Output = Duration;
    fn neg(self) -> Duration {
        Duration(-self.0)
    }
}

impl std::iter::Sum for Duration {
    fn sum<I: Iterator<Item = Duration>>(iter: I) -> Duration {
        Duration(iter.map(|d| d.0).sum())
    }
}

/// A time window. Closed in the math, treated as half-open `[lo, hi)` when
/// counting occupancy: intervals that only touch do not conflict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: TimePoint,
    pub hi: TimePoint,
}

impl Interval {
    pub fn new(lo: TimePoint, hi: TimePoint) -> Self {
        debug_assert!(lo <= hi, "interval bounds out of order");
        Interval { lo, hi }
    }

    pub fn len(&self) -> Duration {
        self.hi - self.lo
    }

    /// True when the half-open interval covers no instant.
    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        !self.is_empty() && !other.is_empty() && self.lo < other.hi && other.lo < self.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Half-open membership.
    pub fn covers(&self, t: TimePoint) -> bool {
        self.lo <= t && t < self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minute_conversion_is_exact_on_grid() {
        assert_eq!(minutes_to_ticks(1.0).unwrap(), 1000);
        assert_eq!(minutes_to_ticks(0.001).unwrap(), 1);
        assert_eq!(minutes_to_ticks(759.3).unwrap(), 759_300);
        assert_eq!(minutes_to_ticks(-2.5).unwrap(), -2500);
        assert!(minutes_to_ticks(0.0005).is_err());
        assert!(minutes_to_ticks(f64::NAN).is_err());
        assert!(minutes_to_ticks(f64::INFINITY).is_err());
    }

    #[test]
    fn formatting_uses_three_decimals() {
        assert_eq!(format_minutes(0), "0.000");
        assert_eq!(format_minutes(16_000), "16.000");
        assert_eq!(format_minutes(-1), "-0.001");
        assert_eq!(format_minutes(759_300), "759.300");
    }

    #[test]
    fn touching_intervals_do_not_overlap() {
        let a = Interval::new(TimePoint::minutes(4), TimePoint::minutes(7));
        let b = Interval::new(TimePoint::minutes(7), TimePoint::minutes(12));
        assert!(!a.overlaps(&b));
        let c = Interval::new(TimePoint(6_999), TimePoint::minutes(8));
        assert!(a.overlaps(&c));
        let empty = Interval::new(TimePoint::minutes(5), TimePoint::minutes(5));
        assert!(!a.overlaps(&empty));
    }
}
