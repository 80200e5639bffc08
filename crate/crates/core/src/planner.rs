//! Synchronization planners.
//!
//! Every planner starts from a link whose two channels arrive at the same
//! instant `T` and returns a [`SyncPlan`] that makes the classical signal
//! arrive a requested `lead` ahead of the quantum photon:
//!
//! * [`plan_shorten_classical`]: classical fiber becomes `(T - sum(d) - lead) * v_f`.
//! * [`plan_lengthen_pmf`]: PMF becomes `(T + lead) * v_p`.
//! * [`plan_replace_delays`]: path is rerouted through a cheaper delay subset.
//!
//! The first two hit the lead exactly on the integer timebase; the third
//! meets or exceeds it.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optimizer::{select_delays_with, DelayPool, SelectError, SelectOptions};
use crate::physical::{
    transit_times, DelayElement, Length, MediumProfile, NodeId, NodeLink, PhysicalError, Time,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("lead must be non-negative, got {0}")]
    NegativeLead(Time),
    #[error("node `{node}` is not synchronized: quantum transit {quantum}, classical transit {classical}")]
    NotSynchronized {
        node: NodeId,
        quantum: Time,
        classical: Time,
    },
    #[error("node `{node}`: a lead of {lead} would shrink the classical fiber to {length}")]
    LengthUnderflow {
        node: NodeId,
        lead: Time,
        length: Length,
    },
    #[error("{links} links but {targets} lead targets")]
    CountMismatch { links: usize, targets: usize },
    #[error("node `{0}` appears more than once")]
    DuplicateNode(NodeId),
    #[error("no links to plan")]
    NoLinks,
    #[error("node `{node}`: {source}")]
    Select { node: NodeId, source: SelectError },
    #[error("node `{node}`: {source}")]
    Physical { node: NodeId, source: PhysicalError },
}

impl PlanError {
    /// Node the error is attributed to, if any.
    pub fn node(&self) -> Option<&NodeId> {
        match self {
            PlanError::NotSynchronized { node, .. }
            | PlanError::LengthUnderflow { node, .. }
            | PlanError::Select { node, .. }
            | PlanError::Physical { node, .. } => Some(node),
            PlanError::DuplicateNode(node) => Some(node),
            _ => None,
        }
    }
}

/// How far ahead of the quantum photon the classical signal must arrive.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(try_from = "Time", into = "Time")]
pub struct LeadTarget(Time);

impl LeadTarget {
    pub const ZERO: LeadTarget = LeadTarget(Time::ZERO);

    pub fn new(lead: Time) -> Result<Self, PlanError> {
        if lead < Time::ZERO {
            return Err(PlanError::NegativeLead(lead));
        }
        Ok(LeadTarget(lead))
    }

    pub fn lead(self) -> Time {
        self.0
    }
}

impl TryFrom<Time> for LeadTarget {
    type Error = PlanError;
    fn try_from(t: Time) -> Result<Self, Self::Error> {
        LeadTarget::new(t)
    }
}

impl From<LeadTarget> for Time {
    fn from(l: LeadTarget) -> Time {
        l.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanModel {
    ShortenClassical,
    LengthenPmf,
    ReplaceDelays,
}

impl fmt::Display for PlanModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanModel::ShortenClassical => "shorten_classical",
            PlanModel::LengthenPmf => "lengthen_pmf",
            PlanModel::ReplaceDelays => "replace_delays",
        })
    }
}

/// The two models that only change cable lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthModel {
    ShortenClassical,
    LengthenPmf,
}

/// Adjustment for one node. `None` means the aspect is left as it was.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncPlan {
    pub node_id: NodeId,
    pub model: PlanModel,
    #[serde(rename = "new_quantum_length_um")]
    pub new_quantum_length: Option<Length>,
    #[serde(rename = "new_classical_length_um")]
    pub new_classical_length: Option<Length>,
    pub chosen_delays: Option<Vec<DelayElement>>,
    /// Quantum minus classical arrival once the plan is in place.
    #[serde(rename = "predicted_gap_ps")]
    pub predicted_gap: Time,
    /// Gap beyond the requested lead; only the delay model overshoots.
    #[serde(rename = "slack_ps")]
    pub slack: Time,
}

impl SyncPlan {
    fn unchanged(node_id: NodeId, model: PlanModel) -> Self {
        SyncPlan {
            node_id,
            model,
            new_quantum_length: None,
            new_classical_length: None,
            chosen_delays: None,
            predicted_gap: Time::ZERO,
            slack: Time::ZERO,
        }
    }

    /// The link as it looks after the plan is carried out.
    pub fn apply(&self, link: &NodeLink) -> NodeLink {
        let mut out = link.clone();
        if let Some(q) = self.new_quantum_length {
            out = out.with_quantum_length(q);
        }
        if let Some(c) = self.new_classical_length {
            out = out.with_classical_length(c);
        }
        if let Some(delays) = &self.chosen_delays {
            out = out.with_delays(delays.clone());
        }
        out
    }
}

/// Common transit time `T` of a synchronized link.
fn synchronized_at(link: &NodeLink, medium: &MediumProfile) -> Result<Time, PlanError> {
    let tt = transit_times(link, medium).map_err(|source| PlanError::Physical {
        node: link.node_id().clone(),
        source,
    })?;
    if tt.quantum != tt.classical {
        return Err(PlanError::NotSynchronized {
            node: link.node_id().clone(),
            quantum: tt.quantum,
            classical: tt.classical,
        });
    }
    Ok(tt.quantum)
}

fn physical(link: &NodeLink) -> impl FnOnce(PhysicalError) -> PlanError + '_ {
    move |source| PlanError::Physical {
        node: link.node_id().clone(),
        source,
    }
}

/// Shortens the classical fiber so the classical signal leads by `target`.
pub fn plan_shorten_classical(
    link: &NodeLink,
    medium: &MediumProfile,
    target: LeadTarget,
) -> Result<SyncPlan, PlanError> {
    let t = synchronized_at(link, medium)?;
    let mut plan = SyncPlan::unchanged(link.node_id().clone(), PlanModel::ShortenClassical);
    if target.lead() == Time::ZERO {
        return Ok(plan);
    }
    let fiber_time = t
        .checked_sub(link.total_delay())
        .and_then(|f| f.checked_sub(target.lead()))
        .ok_or_else(|| physical(link)(PhysicalError::Overflow))?;
    let length = medium
        .v_f()
        .length_for(fiber_time)
        .map_err(physical(link))?;
    if length <= Length::ZERO {
        return Err(PlanError::LengthUnderflow {
            node: link.node_id().clone(),
            lead: target.lead(),
            length,
        });
    }
    plan.new_classical_length = Some(length);
    plan.predicted_gap = target.lead();
    Ok(plan)
}

/// Lengthens the PMF so the quantum photon trails by `target`.
pub fn plan_lengthen_pmf(
    link: &NodeLink,
    medium: &MediumProfile,
    target: LeadTarget,
) -> Result<SyncPlan, PlanError> {
    let t = synchronized_at(link, medium)?;
    let mut plan = SyncPlan::unchanged(link.node_id().clone(), PlanModel::LengthenPmf);
    if target.lead() == Time::ZERO {
        return Ok(plan);
    }
    let quantum_time = t
        .checked_add(target.lead())
        .ok_or_else(|| physical(link)(PhysicalError::Overflow))?;
    let length = medium
        .v_p()
        .length_for(quantum_time)
        .map_err(physical(link))?;
    plan.new_quantum_length = Some(length);
    plan.predicted_gap = target.lead();
    Ok(plan)
}

/// Keeps both cables and reroutes the classical path through an optimal
/// subset of `pool`.
pub fn plan_replace_delays(
    link: &NodeLink,
    medium: &MediumProfile,
    pool: &DelayPool,
    target: LeadTarget,
    opts: &SelectOptions,
) -> Result<SyncPlan, PlanError> {
    synchronized_at(link, medium)?;
    let selection = select_delays_with(link.delays(), pool, target, opts).map_err(|source| {
        PlanError::Select {
            node: link.node_id().clone(),
            source,
        }
    })?;
    Ok(SyncPlan {
        node_id: link.node_id().clone(),
        model: PlanModel::ReplaceDelays,
        new_quantum_length: None,
        new_classical_length: None,
        chosen_delays: Some(selection.chosen),
        predicted_gap: selection.saving,
        slack: selection.slack,
    })
}

/// Plans every node independently with the same model. Outer errors are
/// about the inputs as a whole; per-node failures come back in place.
pub fn plan_multinode(
    links: &[NodeLink],
    medium: &MediumProfile,
    targets: &[LeadTarget],
    model: LengthModel,
) -> Result<Vec<Result<SyncPlan, PlanError>>, PlanError> {
    if links.is_empty() {
        return Err(PlanError::NoLinks);
    }
    if links.len() != targets.len() {
        return Err(PlanError::CountMismatch {
            links: links.len(),
            targets: targets.len(),
        });
    }
    let mut seen = HashSet::new();
    for link in links {
        if !seen.insert(link.node_id()) {
            return Err(PlanError::DuplicateNode(link.node_id().clone()));
        }
    }
    let plan_one = match model {
        LengthModel::ShortenClassical => plan_shorten_classical,
        LengthModel::LengthenPmf => plan_lengthen_pmf,
    };
    Ok(links
        .iter()
        .zip(targets)
        .map(|(link, &target)| plan_one(link, medium, target))
        .collect())
}
