//! Physical constants, media, link geometry and channel kinematics.
//!
//! Time is integer picoseconds and length integer micrometers. Velocities
//! are exact fractions of um/ps, and every length/time conversion rounds
//! once, half away from zero. For any medium faster than 1 um/ps (every
//! realistic choice of `c`) a length computed from a time converts back to
//! the same time exactly.

mod link;
mod medium;
mod units;

pub use link::{
    classical_path_length, quantum_path_length, total_delay, transit_times, DelayElement, DelayId,
    NodeId, NodeLink, TransitTimes,
};
pub use medium::{photon_velocity, MediumProfile, RefractiveIndex, Velocity, C_VACUUM};
pub use units::{Length, Time};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhysicalError {
    #[error("refraction index {0} outside the PMF range 1 < n_p < 3/2")]
    RefractionOutOfRange(RefractiveIndex),
    #[error("invalid refraction index `{0}`")]
    InvalidRefraction(String),
    #[error("speed of light must be positive")]
    InvalidSpeedOfLight,
    #[error("time must be positive, got {0}")]
    NonPositiveTime(Time),
    #[error("serial delays total {delays}, which leaves no fiber budget within {t}")]
    DelayExceedsBudget { delays: Time, t: Time },
    #[error("delay `{id}` must have positive duration, got {duration}")]
    NonPositiveDelay { id: DelayId, duration: Time },
    #[error("cable length must be non-negative, got {0}")]
    NegativeLength(Length),
    #[error("arithmetic overflow in time/length conversion")]
    Overflow,
}
