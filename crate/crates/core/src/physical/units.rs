//! Integer timebase and length units.
//!
//! Time is counted in whole picoseconds and length in whole micrometers.
//! Every conversion between the two goes through an exact rational velocity
//! (see [`super::medium::Velocity`]) and a single rounding step, so sums and
//! differences of times never drift.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Signed duration or instant, in picoseconds.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Time(i64);

impl Time {
    pub const ZERO: Time = Time(0);
    pub const PS_PER_NS: i64 = 1_000;
    pub const PS_PER_US: i64 = 1_000_000;
    pub const PS_PER_S: i64 = 1_000_000_000_000;

    pub const fn from_ps(ps: i64) -> Self {
        Time(ps)
    }

    pub const fn from_ns(ns: i64) -> Self {
        Time(ns * Self::PS_PER_NS)
    }

    pub const fn from_us(us: i64) -> Self {
        Time(us * Self::PS_PER_US)
    }

    pub const fn as_ps(self) -> i64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / Self::PS_PER_S as f64
    }

    pub fn checked_add(self, rhs: Time) -> Option<Time> {
        self.0.checked_add(rhs.0).map(Time)
    }

    pub fn checked_sub(self, rhs: Time) -> Option<Time> {
        self.0.checked_sub(rhs.0).map(Time)
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn abs(self) -> Time {
        Time(self.0.abs())
    }

    /// Sum that reports overflow instead of wrapping.
    pub fn checked_sum<I: IntoIterator<Item = Time>>(iter: I) -> Option<Time> {
        iter.into_iter()
            .try_fold(Time::ZERO, |acc, t| acc.checked_add(t))
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        self.0 += rhs.0;
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0 - rhs.0)
    }
}

impl SubAssign for Time {
    fn sub_assign(&mut self, rhs: Time) {
        self.0 -= rhs.0;
    }
}

impl Neg for Time {
    type Output = Time;
    fn neg(self) -> Time {
        Time(-self.0)
    }
}

impl Sum for Time {
    fn sum<I: Iterator<Item = Time>>(iter: I) -> Time {
        iter.fold(Time::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Time> for Time {
    fn sum<I: Iterator<Item = &'a Time>>(iter: I) -> Time {
        iter.copied().sum()
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ps", self.0)
    }
}

/// Cable length in micrometers. Installed cables are non-negative; planner
/// intermediates may go negative before they are rejected.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Length(i64);

impl Length {
    pub const ZERO: Length = Length(0);
    pub const UM_PER_MM: i64 = 1_000;
    pub const UM_PER_M: i64 = 1_000_000;

    pub const fn from_um(um: i64) -> Self {
        Length(um)
    }

    pub const fn from_mm(mm: i64) -> Self {
        Length(mm * Self::UM_PER_MM)
    }

    pub const fn from_m(m: i64) -> Self {
        Length(m * Self::UM_PER_M)
    }

    pub const fn as_um(self) -> i64 {
        self.0
    }

    pub fn as_m_f64(self) -> f64 {
        self.0 as f64 / Self::UM_PER_M as f64
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl Add for Length {
    type Output = Length;
    fn add(self, rhs: Length) -> Length {
        Length(self.0 + rhs.0)
    }
}

impl Sub for Length {
    type Output = Length;
    fn sub(self, rhs: Length) -> Length {
        Length(self.0 - rhs.0)
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} um", self.0)
    }
}

/// `num / den` rounded half away from zero. `den` must be positive.
pub(crate) fn div_round_half_away(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    let q = num / den;
    let r = num % den;
    if 2 * r.abs() >= den {
        q + num.signum()
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_sign_symmetric() {
        assert_eq!(div_round_half_away(5, 2), 3);
        assert_eq!(div_round_half_away(-5, 2), -3);
        assert_eq!(div_round_half_away(4, 3), 1);
        assert_eq!(div_round_half_away(-4, 3), -1);
        assert_eq!(div_round_half_away(5, 3), 2);
        assert_eq!(div_round_half_away(-5, 3), -2);
        assert_eq!(div_round_half_away(0, 7), 0);
    }

    #[test]
    fn time_range_covers_eleven_days() {
        let big = Time::from_ps(1_000_000_000_000_000_000);
        assert_eq!((-big).as_ps(), -1_000_000_000_000_000_000);
        assert!(big.checked_add(big).is_some());
        assert!(Time::from_ps(i64::MAX)
            .checked_add(Time::from_ps(1))
            .is_none());
    }

    #[test]
    fn unit_constructors() {
        assert_eq!(Time::from_us(10).as_ps(), 10_000_000);
        assert_eq!(Time::from_ns(3).as_ps(), 3_000);
        assert_eq!(Length::from_m(2400).as_um(), 2_400_000_000);
        assert_eq!(Length::from_mm(1).as_um(), 1_000);
        assert_eq!(
            Time::checked_sum([Time::from_us(1), Time::from_us(2)]),
            Some(Time::from_us(3))
        );
    }
}
