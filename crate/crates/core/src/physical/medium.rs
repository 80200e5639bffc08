//! Propagation media and exact rational velocities.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::units::{div_round_half_away, Length, Time};
use super::PhysicalError;

/// Speed of light in vacuum, m/s.
pub const C_VACUUM: u64 = 299_792_458;

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Refraction index of the polarization-maintaining fiber, held as an exact
/// positive fraction so that the derived photon velocity is exact too.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RefractiveIndex {
    num: u64,
    den: u64,
}

impl RefractiveIndex {
    pub fn from_ratio(num: u64, den: u64) -> Result<Self, PhysicalError> {
        if num == 0 || den == 0 {
            return Err(PhysicalError::InvalidRefraction(format!("{num}/{den}")));
        }
        let g = gcd(num as i128, den as i128) as u64;
        Ok(RefractiveIndex {
            num: num / g,
            den: den / g,
        })
    }

    /// Parses a plain decimal such as `1.4682`.
    pub fn from_decimal_str(s: &str) -> Result<Self, PhysicalError> {
        let bad = || PhysicalError::InvalidRefraction(s.to_owned());
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty()
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || frac_part.len() > 18
        {
            return Err(bad());
        }
        let den = 10u64.checked_pow(frac_part.len() as u32).ok_or_else(bad)?;
        let digits = format!("{int_part}{frac_part}");
        let num: u64 = digits.parse().map_err(|_| bad())?;
        Self::from_ratio(num, den).map_err(|_| bad())
    }

    /// Uses the shortest decimal representation that round-trips the float,
    /// so `1.25_f64` becomes exactly 5/4.
    pub fn from_f64(x: f64) -> Result<Self, PhysicalError> {
        if !x.is_finite() || x <= 0.0 {
            return Err(PhysicalError::InvalidRefraction(x.to_string()));
        }
        let s = format!("{x}");
        if s.contains(['e', 'E']) {
            return Err(PhysicalError::InvalidRefraction(s));
        }
        Self::from_decimal_str(&s)
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Strict `1 < n < 3/2`.
    pub fn in_pmf_range(&self) -> bool {
        let (n, d) = (self.num as u128, self.den as u128);
        n > d && 2 * n < 3 * d
    }
}

impl fmt::Display for RefractiveIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

impl Serialize for RefractiveIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for RefractiveIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        RefractiveIndex::from_f64(x).map_err(serde::de::Error::custom)
    }
}

/// Velocity as an exact fraction of micrometers per picosecond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Velocity {
    num: i128,
    den: i128,
}

impl Velocity {
    fn new(num: i128, den: i128) -> Self {
        debug_assert!(num > 0 && den > 0);
        let g = gcd(num, den);
        Velocity {
            num: num / g,
            den: den / g,
        }
    }

    /// 1 m/s is 10^-6 um/ps.
    pub fn from_m_per_s(v: u64) -> Self {
        Velocity::new(v as i128, 1_000_000)
    }

    pub fn um_per_ps(&self) -> (i128, i128) {
        (self.num, self.den)
    }

    pub fn as_m_per_s_f64(&self) -> f64 {
        self.num as f64 / self.den as f64 * 1e6
    }

    fn scale(&self, num: i128, den: i128) -> Velocity {
        Velocity::new(self.num * num, self.den * den)
    }

    /// Distance covered in `t`, rounded half away from zero.
    pub fn length_for(&self, t: Time) -> Result<Length, PhysicalError> {
        let prod = (t.as_ps() as i128)
            .checked_mul(self.num)
            .ok_or(PhysicalError::Overflow)?;
        let um = div_round_half_away(prod, self.den);
        i64::try_from(um)
            .map(Length::from_um)
            .map_err(|_| PhysicalError::Overflow)
    }

    /// Time needed to cover `len`, rounded half away from zero.
    pub fn time_for(&self, len: Length) -> Result<Time, PhysicalError> {
        let prod = (len.as_um() as i128)
            .checked_mul(self.den)
            .ok_or(PhysicalError::Overflow)?;
        let ps = div_round_half_away(prod, self.num);
        i64::try_from(ps)
            .map(Time::from_ps)
            .map_err(|_| PhysicalError::Overflow)
    }
}

impl PartialOrd for Velocity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Velocity {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// `c / n_p`, failing unless `1 < n_p < 3/2`.
pub fn photon_velocity(c_vacuum: u64, n_p: RefractiveIndex) -> Result<Velocity, PhysicalError> {
    if c_vacuum == 0 {
        return Err(PhysicalError::InvalidSpeedOfLight);
    }
    if !n_p.in_pmf_range() {
        return Err(PhysicalError::RefractionOutOfRange(n_p));
    }
    Ok(Velocity::from_m_per_s(c_vacuum).scale(n_p.den as i128, n_p.num as i128))
}

/// Light speeds for the two channel media: PMF on the quantum side and
/// silica fiber (two thirds of `c`) on the classical side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MediumRepr", into = "MediumRepr")]
pub struct MediumProfile {
    c_vacuum: u64,
    n_p: RefractiveIndex,
    v_p: Velocity,
    v_f: Velocity,
}

impl MediumProfile {
    pub fn new(c_vacuum: u64, n_p: RefractiveIndex) -> Result<Self, PhysicalError> {
        let v_p = photon_velocity(c_vacuum, n_p)?;
        let v_f = Velocity::from_m_per_s(c_vacuum).scale(2, 3);
        Ok(MediumProfile {
            c_vacuum,
            n_p,
            v_p,
            v_f,
        })
    }

    pub fn with_default_c(n_p: RefractiveIndex) -> Result<Self, PhysicalError> {
        Self::new(C_VACUUM, n_p)
    }

    pub fn c_vacuum(&self) -> u64 {
        self.c_vacuum
    }

    pub fn refraction_index(&self) -> RefractiveIndex {
        self.n_p
    }

    /// Photon velocity in the PMF.
    pub fn v_p(&self) -> Velocity {
        self.v_p
    }

    /// Light velocity in the classical fiber.
    pub fn v_f(&self) -> Velocity {
        self.v_f
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MediumRepr {
    c_vacuum_m_per_s: u64,
    refraction_index: RefractiveIndex,
}

impl TryFrom<MediumRepr> for MediumProfile {
    type Error = PhysicalError;
    fn try_from(r: MediumRepr) -> Result<Self, Self::Error> {
        MediumProfile::new(r.c_vacuum_m_per_s, r.refraction_index)
    }
}

impl From<MediumProfile> for MediumRepr {
    fn from(m: MediumProfile) -> Self {
        MediumRepr {
            c_vacuum_m_per_s: m.c_vacuum,
            refraction_index: m.n_p,
        }
    }
}
