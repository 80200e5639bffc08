//! Link geometry and the length/time kinematics for both channels.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::medium::MediumProfile;
use super::units::{Length, Time};
use super::PhysicalError;

/// Destination node identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Identifier of one multihop delay element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DelayId(pub String);

impl DelayId {
    pub fn new(id: impl Into<String>) -> Self {
        DelayId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DelayId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A fixed-duration stage on the classical path (propagation, processing,
/// transmission or queueing). Switching time is modeled as one of these.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DelayRepr")]
pub struct DelayElement {
    id: DelayId,
    #[serde(rename = "duration_ps")]
    duration: Time,
}

#[derive(Deserialize)]
struct DelayRepr {
    id: DelayId,
    duration_ps: Time,
}

impl TryFrom<DelayRepr> for DelayElement {
    type Error = PhysicalError;
    fn try_from(r: DelayRepr) -> Result<Self, Self::Error> {
        DelayElement::new(r.id, r.duration_ps)
    }
}

impl DelayElement {
    pub fn new(id: DelayId, duration: Time) -> Result<Self, PhysicalError> {
        if !duration.is_positive() {
            return Err(PhysicalError::NonPositiveDelay { id, duration });
        }
        Ok(DelayElement { id, duration })
    }

    pub fn id(&self) -> &DelayId {
        &self.id
    }

    pub fn duration(&self) -> Time {
        self.duration
    }
}

/// Total serial delay of a list of elements.
pub fn total_delay(delays: &[DelayElement]) -> Result<Time, PhysicalError> {
    Time::checked_sum(delays.iter().map(DelayElement::duration)).ok_or(PhysicalError::Overflow)
}

/// Everything between the sender and one destination node: a direct PMF run
/// for the quantum channel and a fiber run plus `k_i` serial delays for the
/// classical channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeLink {
    node_id: NodeId,
    #[serde(rename = "quantum_length_um")]
    quantum_length: Length,
    #[serde(rename = "classical_length_um")]
    classical_length: Length,
    delays: Vec<DelayElement>,
}

impl NodeLink {
    pub fn new(
        node_id: NodeId,
        quantum_length: Length,
        classical_length: Length,
        delays: Vec<DelayElement>,
    ) -> Result<Self, PhysicalError> {
        for len in [quantum_length, classical_length] {
            if len.is_negative() {
                return Err(PhysicalError::NegativeLength(len));
            }
        }
        total_delay(&delays)?;
        Ok(NodeLink {
            node_id,
            quantum_length,
            classical_length,
            delays,
        })
    }

    /// Builds a link that is synchronized at `t`: both channels take exactly
    /// `t` to reach the node.
    pub fn synchronized(
        node_id: NodeId,
        t: Time,
        delays: Vec<DelayElement>,
        medium: &MediumProfile,
    ) -> Result<Self, PhysicalError> {
        let q = quantum_path_length(t, medium)?;
        let c = classical_path_length(t, &delays, medium)?;
        NodeLink::new(node_id, q, c, delays)
    }

    pub fn node_id(&self) -> &NodeId {
        &self.node_id
    }

    pub fn quantum_length(&self) -> Length {
        self.quantum_length
    }

    pub fn classical_length(&self) -> Length {
        self.classical_length
    }

    pub fn delays(&self) -> &[DelayElement] {
        &self.delays
    }

    pub fn total_delay(&self) -> Time {
        // checked at construction
        self.delays.iter().map(DelayElement::duration).sum()
    }

    pub(crate) fn with_quantum_length(&self, len: Length) -> NodeLink {
        NodeLink {
            quantum_length: len,
            ..self.clone()
        }
    }

    pub(crate) fn with_classical_length(&self, len: Length) -> NodeLink {
        NodeLink {
            classical_length: len,
            ..self.clone()
        }
    }

    pub(crate) fn with_delays(&self, delays: Vec<DelayElement>) -> NodeLink {
        NodeLink {
            delays,
            ..self.clone()
        }
    }
}

/// PMF length a photon covers in `t`.
pub fn quantum_path_length(t: Time, medium: &MediumProfile) -> Result<Length, PhysicalError> {
    if !t.is_positive() {
        return Err(PhysicalError::NonPositiveTime(t));
    }
    medium.v_p().length_for(t)
}

/// Fiber length covered in `t` once the serial delays are spent.
pub fn classical_path_length(
    t: Time,
    delays: &[DelayElement],
    medium: &MediumProfile,
) -> Result<Length, PhysicalError> {
    if !t.is_positive() {
        return Err(PhysicalError::NonPositiveTime(t));
    }
    let budget = total_delay(delays)?;
    if budget >= t {
        return Err(PhysicalError::DelayExceedsBudget { delays: budget, t });
    }
    medium.v_f().length_for(t - budget)
}

/// Transit times of one link, quantum first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitTimes {
    pub quantum: Time,
    pub classical: Time,
}

impl TransitTimes {
    /// Quantum minus classical: positive when the classical signal leads.
    pub fn lead(&self) -> Time {
        self.quantum - self.classical
    }
}

pub fn transit_times(
    link: &NodeLink,
    medium: &MediumProfile,
) -> Result<TransitTimes, PhysicalError> {
    let quantum = medium.v_p().time_for(link.quantum_length)?;
    let classical = medium
        .v_f()
        .time_for(link.classical_length)?
        .checked_add(link.total_delay())
        .ok_or(PhysicalError::Overflow)?;
    Ok(TransitTimes { quantum, classical })
}
