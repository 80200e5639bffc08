//! Photon-packet transit simulation and the per-packet synchronization gate.
//!
//! Each emission leaves the sender on both channels at once. The quantum copy
//! arrives after the PMF transit, the classical copy after the fiber transit
//! plus serial delays. The gate then compares the pair: if the classical
//! copy is not later than the quantum one the packet continues, otherwise
//! the photons are dropped and the loop moves on to the next packet.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physical::{
    transit_times, MediumProfile, NodeId, NodeLink, PhysicalError, Time, TransitTimes,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("packet {packet} is scheduled for unknown node `{node}`")]
    UnknownNode { packet: PacketId, node: NodeId },
    #[error("jitter refers to unscheduled packet {0}")]
    UnknownPacket(PacketId),
    #[error("packet id {0} is scheduled more than once")]
    DuplicatePacket(PacketId),
    #[error("emission of packet {packet} at {at} precedes the previous emission at {previous}")]
    OutOfOrder {
        packet: PacketId,
        at: Time,
        previous: Time,
    },
    #[error("node `{0}` has more than one link")]
    DuplicateNode(NodeId),
    #[error("arrival time of packet {0} overflows the timebase")]
    Overflow(PacketId),
    #[error("node `{node}`: {source}")]
    Physical { node: NodeId, source: PhysicalError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PacketId(pub u64);

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Emission {
    #[serde(rename = "emit_time_ps")]
    pub emit_time: Time,
    pub node_id: NodeId,
    pub packet_id: PacketId,
}

/// Emissions in non-decreasing time order with unique packet ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EmissionSchedule {
    emissions: Vec<Emission>,
}

impl EmissionSchedule {
    pub fn new(emissions: Vec<Emission>) -> Result<Self, SimError> {
        let mut seen = HashSet::with_capacity(emissions.len());
        let mut previous: Option<Time> = None;
        for e in &emissions {
            if !seen.insert(e.packet_id) {
                return Err(SimError::DuplicatePacket(e.packet_id));
            }
            if let Some(prev) = previous {
                if e.emit_time < prev {
                    return Err(SimError::OutOfOrder {
                        packet: e.packet_id,
                        at: e.emit_time,
                        previous: prev,
                    });
                }
            }
            previous = Some(e.emit_time);
        }
        Ok(EmissionSchedule { emissions })
    }

    /// `count` packets to one node, `spacing` apart, ids starting at `first_id`.
    pub fn periodic(node: &NodeId, start: Time, spacing: Time, count: u64, first_id: u64) -> Self {
        let emissions = (0..count)
            .map(|k| Emission {
                emit_time: start + Time::from_ps(spacing.as_ps() * k as i64),
                node_id: node.clone(),
                packet_id: PacketId(first_id + k),
            })
            .collect();
        EmissionSchedule { emissions }
    }

    pub fn emissions(&self) -> &[Emission] {
        &self.emissions
    }

    pub fn len(&self) -> usize {
        self.emissions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.emissions.is_empty()
    }
}

/// Extra per-packet latency on each channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChannelOffsets {
    #[serde(rename = "quantum_ps")]
    pub quantum: Time,
    #[serde(rename = "classical_ps")]
    pub classical: Time,
}

/// Deterministic jitter, supplied by the caller per packet.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Jitter {
    offsets: HashMap<PacketId, ChannelOffsets>,
}

impl Jitter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, packet: PacketId, offsets: ChannelOffsets) {
        self.offsets.insert(packet, offsets);
    }

    pub fn get(&self, packet: PacketId) -> Option<&ChannelOffsets> {
        self.offsets.get(&packet)
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Entries sorted by packet id.
    pub fn sorted(&self) -> Vec<(PacketId, ChannelOffsets)> {
        let mut v: Vec<_> = self.offsets.iter().map(|(k, v)| (*k, *v)).collect();
        v.sort_by_key(|(k, _)| *k);
        v
    }
}

impl FromIterator<(PacketId, ChannelOffsets)> for Jitter {
    fn from_iter<I: IntoIterator<Item = (PacketId, ChannelOffsets)>>(iter: I) -> Self {
        Jitter {
            offsets: iter.into_iter().collect(),
        }
    }
}

/// Paired arrivals of one packet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitEvent {
    pub packet_id: PacketId,
    pub node_id: NodeId,
    #[serde(rename = "t_qa_ps")]
    pub t_qa: Time,
    #[serde(rename = "t_ca_ps")]
    pub t_ca: Time,
    /// Classical minus quantum arrival.
    #[serde(rename = "t_delta_ps")]
    pub t_delta: Time,
}

impl TransitEvent {
    pub fn new(packet_id: PacketId, node_id: NodeId, t_qa: Time, t_ca: Time) -> Self {
        TransitEvent {
            packet_id,
            node_id,
            t_qa,
            t_ca,
            t_delta: t_ca - t_qa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Continue,
    Drop,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Continue => "continue",
            Verdict::Drop => "drop",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateDecision {
    pub packet_id: PacketId,
    pub verdict: Verdict,
}

/// Transits every scheduled packet. Events come back ordered by
/// `(node_id, packet_id)`.
pub fn simulate(
    links: &[NodeLink],
    medium: &MediumProfile,
    schedule: &EmissionSchedule,
    jitter: Option<&Jitter>,
) -> Result<Vec<TransitEvent>, SimError> {
    let mut transit: HashMap<&NodeId, TransitTimes> = HashMap::with_capacity(links.len());
    for link in links {
        let tt = transit_times(link, medium).map_err(|source| SimError::Physical {
            node: link.node_id().clone(),
            source,
        })?;
        if transit.insert(link.node_id(), tt).is_some() {
            return Err(SimError::DuplicateNode(link.node_id().clone()));
        }
    }

    if let Some(jitter) = jitter {
        let scheduled: HashSet<PacketId> =
            schedule.emissions().iter().map(|e| e.packet_id).collect();
        if let Some(bad) = jitter
            .sorted()
            .into_iter()
            .map(|(p, _)| p)
            .find(|p| !scheduled.contains(p))
        {
            return Err(SimError::UnknownPacket(bad));
        }
    }

    let mut events = Vec::with_capacity(schedule.len());
    for e in schedule.emissions() {
        let tt = transit
            .get(&e.node_id)
            .ok_or_else(|| SimError::UnknownNode {
                packet: e.packet_id,
                node: e.node_id.clone(),
            })?;
        let offsets = jitter
            .and_then(|j| j.get(e.packet_id))
            .copied()
            .unwrap_or_default();
        let arrive = |transit: Time, offset: Time| {
            e.emit_time
                .checked_add(transit)
                .and_then(|t| t.checked_add(offset))
                .ok_or(SimError::Overflow(e.packet_id))
        };
        let t_qa = arrive(tt.quantum, offsets.quantum)?;
        let t_ca = arrive(tt.classical, offsets.classical)?;
        events.push(TransitEvent::new(
            e.packet_id,
            e.node_id.clone(),
            t_qa,
            t_ca,
        ));
    }
    events.sort_by(|a, b| {
        a.node_id
            .cmp(&b.node_id)
            .then_with(|| a.packet_id.cmp(&b.packet_id))
    });
    Ok(events)
}

/// The drop/continue gate with an optional tolerance band. The default
/// tolerance of zero is the literal `t_delta <= 0` test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SyncGate {
    pub tolerance: Time,
}

impl SyncGate {
    pub fn with_tolerance(tolerance: Time) -> Self {
        SyncGate { tolerance }
    }

    pub fn decide(&self, event: &TransitEvent) -> GateDecision {
        let verdict = if event.t_delta <= self.tolerance {
            Verdict::Continue
        } else {
            Verdict::Drop
        };
        GateDecision {
            packet_id: event.packet_id,
            verdict,
        }
    }
}

/// Continue iff the classical copy is not late.
pub fn sync_gate(event: &TransitEvent) -> GateDecision {
    SyncGate::default().decide(event)
}

/// Mean kept as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExactMean {
    pub sum_ps: i128,
    pub count: u64,
}

impl ExactMean {
    fn push(&mut self, t: Time) {
        self.sum_ps += t.as_ps() as i128;
        self.count += 1;
    }

    /// Reduced `(numerator, denominator)`, or `None` when empty.
    pub fn ratio(&self) -> Option<(i128, i128)> {
        if self.count == 0 {
            return None;
        }
        let (mut a, mut b) = (self.sum_ps.abs(), self.count as i128);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        let g = a.max(1);
        Some((self.sum_ps / g, self.count as i128 / g))
    }

    pub fn as_f64(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum_ps as f64 / self.count as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NodeGateStats {
    pub continued: u64,
    pub dropped: u64,
    /// `None` when the node saw no packets.
    #[serde(rename = "min_t_delta_ps")]
    pub min_t_delta: Option<Time>,
    #[serde(rename = "max_t_delta_ps")]
    pub max_t_delta: Option<Time>,
    #[serde(rename = "mean_t_delta")]
    pub mean: ExactMean,
}

impl NodeGateStats {
    fn record(&mut self, event: &TransitEvent, verdict: Verdict) {
        match verdict {
            Verdict::Continue => self.continued += 1,
            Verdict::Drop => self.dropped += 1,
        }
        let d = event.t_delta;
        self.min_t_delta = Some(self.min_t_delta.map_or(d, |m| m.min(d)));
        self.max_t_delta = Some(self.max_t_delta.map_or(d, |m| m.max(d)));
        self.mean.push(d);
    }

    fn merge(&mut self, other: &NodeGateStats) {
        self.continued += other.continued;
        self.dropped += other.dropped;
        self.min_t_delta = match (self.min_t_delta, other.min_t_delta) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.max_t_delta = match (self.max_t_delta, other.max_t_delta) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self.mean.sum_ps += other.mean.sum_ps;
        self.mean.count += other.mean.count;
    }
}

/// Outcome of running the gate over a stream of events.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GateRun {
    pub per_node: BTreeMap<NodeId, NodeGateStats>,
    pub decisions: Vec<GateDecision>,
}

impl GateRun {
    /// Totals across all nodes.
    pub fn totals(&self) -> NodeGateStats {
        let mut all = NodeGateStats::default();
        for stats in self.per_node.values() {
            all.merge(stats);
        }
        all
    }
}

/// Applies the gate to each event in turn: continue, or drop and move on.
pub fn run_sync_loop<'a, I>(events: I, gate: SyncGate) -> GateRun
where
    I: IntoIterator<Item = &'a TransitEvent>,
{
    let mut run = GateRun::default();
    for event in events {
        let decision = gate.decide(event);
        run.per_node
            .entry(event.node_id.clone())
            .or_default()
            .record(event, decision.verdict);
        run.decisions.push(decision);
    }
    run
}
