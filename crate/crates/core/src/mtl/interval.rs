//! Half-open integer time intervals `[start, end)` with an optional infinite end.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Discrete time, in clock units.
pub type Time = u64;

/// Upper bound of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum End {
    Finite(Time),
    Infinite,
}

/// `[start, end)` over the non-negative integers.
///
/// Any construction with `end <= start` collapses to the canonical [`Interval::EMPTY`],
/// so structural equality coincides with set equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    start: Time,
    end: End,
}

impl Interval {
    pub const EMPTY: Interval = Interval { start: 0, end: End::Finite(0) };

    /// `[0, inf)`, the interval of the untimed operators.
    pub const UNBOUNDED: Interval = Interval { start: 0, end: End::Infinite };

    pub fn new(start: Time, end: End) -> Self {
        match end {
            End::Finite(e) if e <= start => Self::EMPTY,
            _ => Interval { start, end },
        }
    }

    pub fn bounded(start: Time, end: Time) -> Self {
        Self::new(start, End::Finite(end))
    }

    pub fn from(start: Time) -> Self {
        Self::new(start, End::Infinite)
    }

    pub fn start(&self) -> Time {
        self.start
    }

    pub fn end(&self) -> End {
        self.end
    }

    pub fn finite_end(&self) -> Option<Time> {
        match self.end {
            End::Finite(e) => Some(e),
            End::Infinite => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::EMPTY
    }

    pub fn contains(&self, a: Time) -> bool {
        !self.is_empty()
            && self.start <= a
            && match self.end {
                End::Finite(e) => a < e,
                End::Infinite => true,
            }
    }

    /// True when the interval ends at or before `a`, i.e. no member is `>= a`.
    pub fn ends_by(&self, a: Time) -> bool {
        match self.end {
            End::Finite(e) => e <= a,
            End::Infinite => false,
        }
    }

    /// `I - t`: both bounds move left by `t`, clamped at zero.
    pub fn shift(&self, t: Time) -> Self {
        if self.is_empty() {
            return Self::EMPTY;
        }
        let start = self.start.saturating_sub(t);
        match self.end {
            End::Finite(e) => Self::bounded(start, e.saturating_sub(t)),
            End::Infinite => Self::from(start),
        }
    }

    /// Largest finite constant mentioned by the interval (0 for `[0, inf)` and EMPTY).
    pub fn max_constant(&self) -> Time {
        match self.end {
            End::Finite(e) => e.max(self.start),
            End::Infinite => self.start,
        }
    }
}

/// `in_interval(tau_i, tau_0, I)`: whether `tau_i - tau_0` lies in `I`.
pub fn in_interval(tau_i: Time, tau_0: Time, interval: &Interval) -> bool {
    debug_assert!(tau_i >= tau_0);
    interval.contains(tau_i - tau_0)
}

/// `interval_shift(I, t)`.
pub fn interval_shift(interval: &Interval, t: Time) -> Interval {
    interval.shift(t)
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.end {
            End::Finite(e) => write!(f, "[{},{})", self.start, e),
            End::Infinite => write!(f, "[{},inf)", self.start),
        }
    }
}
