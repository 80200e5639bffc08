//! Scenario files.
//!
//! A scenario is a single JSON document:
//!
//! ```json
//! {
//!   "version": "1",
//!   "medium": { "c_vacuum_m_per_s": 300000000, "refraction_index": 1.25 },
//!   "links": [
//!     { "node": "ed",
//!       "quantum_length": { "value": 2400, "unit": "m" },
//!       "classical_length": { "value": 1600, "unit": "m" },
//!       "delays": [ { "id": "s1", "duration": { "value": 1, "unit": "us" } } ] }
//!   ],
//!   "targets": [ { "node": "ed", "lead": { "value": 1, "unit": "us" } } ],
//!   "pool": [ { "id": "s1", "duration": { "value": 1, "unit": "us" } } ],
//!   "schedule": [ { "packet": 1, "node": "ed", "emit_time": { "value": 0, "unit": "ps" } } ],
//!   "jitter": [ { "packet": 1, "classical": { "value": 2, "unit": "ps" } } ],
//!   "gate_tolerance": { "value": 0, "unit": "ps" }
//! }
//! ```
//!
//! Times take a `ps`, `ns` or `us` unit and lengths `um`, `mm` or `m`; all
//! values are integers. `c_vacuum_m_per_s`, `targets`, `pool`, `jitter` and
//! `gate_tolerance` are optional. Unknown keys are rejected. Every error
//! carries the line and column it refers to.

mod locate;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optimizer::{DelayPool, SelectError};
use crate::physical::{
    DelayElement, DelayId, Length, MediumProfile, NodeId, NodeLink, PhysicalError, RefractiveIndex,
    Time, C_VACUUM,
};
use crate::planner::LeadTarget;
use crate::sim::{ChannelOffsets, Emission, EmissionSchedule, Jitter, PacketId};

pub use locate::JsonPath;
use locate::{line_col, locate};

pub const FORMAT_VERSION: &str = "1";

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub medium: MediumProfile,
    pub links: Vec<NodeLink>,
    pub targets: BTreeMap<NodeId, LeadTarget>,
    pub pool: Option<DelayPool>,
    pub schedule: EmissionSchedule,
    pub jitter: Option<Jitter>,
    pub gate_tolerance: Time,
}

impl Scenario {
    pub fn link(&self, node: &NodeId) -> Option<&NodeLink> {
        self.links.iter().find(|l| l.node_id() == node)
    }

    /// The explicit pool, or the union of every link's delays.
    pub fn effective_pool(&self) -> Result<DelayPool, SelectError> {
        match &self.pool {
            Some(p) => Ok(p.clone()),
            None => DelayPool::union_of(&self.links),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IssueKind {
    #[serde(rename = "parse")]
    Parse,
    #[serde(rename = "validation")]
    Validation,
}

/// One problem in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub kind: IssueKind,
    pub line: usize,
    pub column: usize,
    /// Empty for syntax errors.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            IssueKind::Parse => "parse error",
            IssueKind::Validation => "validation error",
        };
        write!(f, "{}:{}: {kind}", self.line, self.column)?;
        if !self.path.is_empty() {
            write!(f, " at {}", self.path)?;
        }
        write!(f, ": {}", self.message)
    }
}

/// All problems found in a scenario file, in document order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ScenarioError {
    pub issues: Vec<Issue>,
}

impl ScenarioError {
    pub fn is_parse_error(&self) -> bool {
        self.issues.iter().any(|i| i.kind == IssueKind::Parse)
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Invalid { path: String, source: ScenarioError },
}

pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text).map_err(|source| LoadError::Invalid {
        path: path.display().to_string(),
        source,
    })
}

// ---- file schema ----------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum TimeUnit {
    #[serde(rename = "ps")]
    Ps,
    #[serde(rename = "ns")]
    Ns,
    #[serde(rename = "us")]
    Us,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum LengthUnit {
    #[serde(rename = "um")]
    Um,
    #[serde(rename = "mm")]
    Mm,
    #[serde(rename = "m")]
    M,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeQty {
    value: i64,
    unit: TimeUnit,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LengthQty {
    value: i64,
    unit: LengthUnit,
}

impl TimeQty {
    fn ps(t: Time) -> Self {
        TimeQty {
            value: t.as_ps(),
            unit: TimeUnit::Ps,
        }
    }

    fn to_time(&self) -> Option<Time> {
        let scale = match self.unit {
            TimeUnit::Ps => 1,
            TimeUnit::Ns => Time::PS_PER_NS,
            TimeUnit::Us => Time::PS_PER_US,
        };
        self.value.checked_mul(scale).map(Time::from_ps)
    }
}

impl LengthQty {
    fn um(l: Length) -> Self {
        LengthQty {
            value: l.as_um(),
            unit: LengthUnit::Um,
        }
    }

    fn to_length(&self) -> Option<Length> {
        let scale = match self.unit {
            LengthUnit::Um => 1,
            LengthUnit::Mm => Length::UM_PER_MM,
            LengthUnit::M => Length::UM_PER_M,
        };
        self.value.checked_mul(scale).map(Length::from_um)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMedium {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_vacuum_m_per_s: Option<u64>,
    refraction_index: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDelay {
    id: String,
    duration: TimeQty,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    node: String,
    quantum_length: LengthQty,
    classical_length: LengthQty,
    #[serde(default)]
    delays: Vec<RawDelay>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    node: String,
    lead: TimeQty,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEmission {
    packet: u64,
    node: String,
    emit_time: TimeQty,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJitter {
    packet: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quantum: Option<TimeQty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classical: Option<TimeQty>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    version: String,
    medium: RawMedium,
    links: Vec<RawLink>,
    #[serde(default)]
    targets: Vec<RawTarget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pool: Option<Vec<RawDelay>>,
    schedule: Vec<RawEmission>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jitter: Option<Vec<RawJitter>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gate_tolerance: Option<TimeQty>,
}

// ---- validation -----------------------------------------------------------

struct Validator<'t> {
    text: &'t str,
    issues: Vec<Issue>,
}

impl Validator<'_> {
    fn fail(&mut self, path: &JsonPath, message: impl Into<String>) {
        let (line, column) = locate(self.text, path);
        self.issues.push(Issue {
            kind: IssueKind::Validation,
            line,
            column,
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn time(&mut self, q: &TimeQty, path: &JsonPath) -> Option<Time> {
        let t = q.to_time();
        if t.is_none() {
            self.fail(
                path,
                format!("{} {:?} overflows the picosecond timebase", q.value, q.unit),
            );
        }
        t
    }

    fn length(&mut self, q: &LengthQty, path: &JsonPath) -> Option<Length> {
        match q.to_length() {
            None => {
                self.fail(
                    path,
                    format!("{} {:?} overflows the micrometer range", q.value, q.unit),
                );
                None
            }
            Some(l) if l.is_negative() => {
                self.fail(path, format!("cable length must be non-negative, got {l}"));
                None
            }
            Some(l) => Some(l),
        }
    }

    fn delay(&mut self, raw: &RawDelay, path: &JsonPath) -> Option<DelayElement> {
        let duration = self.time(&raw.duration, &path.key("duration"))?;
        match DelayElement::new(DelayId::new(raw.id.clone()), duration) {
            Ok(d) => Some(d),
            Err(e) => {
                self.fail(&path.key("duration"), e.to_string());
                None
            }
        }
    }

    fn medium(&mut self, raw: &RawMedium) -> Option<MediumProfile> {
        let path = JsonPath::root().key("medium");
        let c = raw.c_vacuum_m_per_s.unwrap_or(C_VACUUM);
        let n = match RefractiveIndex::from_f64(raw.refraction_index) {
            Ok(n) => n,
            Err(e) => {
                self.fail(&path.key("refraction_index"), e.to_string());
                return None;
            }
        };
        match MediumProfile::new(c, n) {
            Ok(m) => Some(m),
            Err(e @ PhysicalError::InvalidSpeedOfLight) => {
                self.fail(&path.key("c_vacuum_m_per_s"), e.to_string());
                None
            }
            Err(e) => {
                self.fail(&path.key("refraction_index"), e.to_string());
                None
            }
        }
    }

    fn run(&mut self, raw: &RawScenario) -> Option<Scenario> {
        let root = JsonPath::root();
        if raw.version != FORMAT_VERSION {
            self.fail(
                &root.key("version"),
                format!(
                    "unsupported version `{}`, expected `{FORMAT_VERSION}`",
                    raw.version
                ),
            );
        }
        let medium = self.medium(&raw.medium);

        let mut links = Vec::with_capacity(raw.links.len());
        let mut node_ids = HashSet::new();
        let mut delay_durations: HashMap<String, Time> = HashMap::new();
        for (i, rl) in raw.links.iter().enumerate() {
            let lp = root.key("links").index(i);
            if !node_ids.insert(rl.node.as_str()) {
                self.fail(
                    &lp.key("node"),
                    format!("duplicate link for node `{}`", rl.node),
                );
            }
            let q = self.length(&rl.quantum_length, &lp.key("quantum_length"));
            let c = self.length(&rl.classical_length, &lp.key("classical_length"));
            let mut delays = Vec::with_capacity(rl.delays.len());
            let mut local = HashSet::new();
            for (j, rd) in rl.delays.iter().enumerate() {
                let dp = lp.key("delays").index(j);
                if !local.insert(rd.id.as_str()) {
                    self.fail(
                        &dp.key("id"),
                        format!("delay `{}` appears twice on this path", rd.id),
                    );
                }
                let Some(d) = self.delay(rd, &dp) else {
                    continue;
                };
                match delay_durations.get(&rd.id) {
                    Some(&other) if other != d.duration() => self.fail(
                        &dp.key("duration"),
                        format!(
                            "delay `{}` is {} here but {} on another link",
                            rd.id,
                            d.duration(),
                            other
                        ),
                    ),
                    _ => {
                        delay_durations.insert(rd.id.clone(), d.duration());
                    }
                }
                delays.push(d);
            }
            if let (Some(q), Some(c)) = (q, c) {
                if delays.len() == rl.delays.len() {
                    match NodeLink::new(NodeId::new(rl.node.clone()), q, c, delays) {
                        Ok(link) => links.push(link),
                        Err(e) => self.fail(&lp.key("delays"), e.to_string()),
                    }
                }
            }
        }

        let mut targets = BTreeMap::new();
        for (i, rt) in raw.targets.iter().enumerate() {
            let tp = root.key("targets").index(i);
            if !node_ids.contains(rt.node.as_str()) {
                self.fail(
                    &tp.key("node"),
                    format!("target references unknown node `{}`", rt.node),
                );
                continue;
            }
            let Some(lead) = self.time(&rt.lead, &tp.key("lead")) else {
                continue;
            };
            match LeadTarget::new(lead) {
                Ok(lead) => {
                    if targets.insert(NodeId::new(rt.node.clone()), lead).is_some() {
                        self.fail(
                            &tp.key("node"),
                            format!("second target for node `{}`", rt.node),
                        );
                    }
                }
                Err(e) => self.fail(&tp.key("lead"), e.to_string()),
            }
        }

        let pool = raw.pool.as_ref().and_then(|rp| {
            let mut elems = Vec::with_capacity(rp.len());
            let mut ids = HashSet::new();
            for (i, rd) in rp.iter().enumerate() {
                let pp = root.key("pool").index(i);
                if !ids.insert(rd.id.as_str()) {
                    self.fail(
                        &pp.key("id"),
                        format!("delay `{}` appears twice in the pool", rd.id),
                    );
                    continue;
                }
                if let Some(d) = self.delay(rd, &pp) {
                    elems.push(d);
                }
            }
            (elems.len() == rp.len()).then(|| DelayPool::new(elems).expect("ids checked above"))
        });

        let mut emissions = Vec::with_capacity(raw.schedule.len());
        let mut packets = HashSet::new();
        let mut previous: Option<Time> = None;
        for (i, re) in raw.schedule.iter().enumerate() {
            let ep = root.key("schedule").index(i);
            if !node_ids.contains(re.node.as_str()) {
                self.fail(
                    &ep.key("node"),
                    format!("packet {} references unknown node `{}`", re.packet, re.node),
                );
            }
            if !packets.insert(re.packet) {
                self.fail(
                    &ep.key("packet"),
                    format!("packet id {} is scheduled twice", re.packet),
                );
            }
            let Some(t) = self.time(&re.emit_time, &ep.key("emit_time")) else {
                continue;
            };
            if let Some(prev) = previous {
                if t < prev {
                    self.fail(
                        &ep.key("emit_time"),
                        format!("emission times must be non-decreasing: {t} after {prev}"),
                    );
                }
            }
            previous = Some(t);
            emissions.push(Emission {
                emit_time: t,
                node_id: NodeId::new(re.node.clone()),
                packet_id: PacketId(re.packet),
            });
        }

        let jitter = raw.jitter.as_ref().map(|rj| {
            let mut seen = HashSet::new();
            let mut jitter = Jitter::new();
            for (i, j) in rj.iter().enumerate() {
                let jp = root.key("jitter").index(i);
                if !packets.contains(&j.packet) {
                    self.fail(
                        &jp.key("packet"),
                        format!("jitter references unscheduled packet {}", j.packet),
                    );
                }
                if !seen.insert(j.packet) {
                    self.fail(
                        &jp.key("packet"),
                        format!("second jitter entry for packet {}", j.packet),
                    );
                }
                let mut offsets = ChannelOffsets::default();
                if let Some(q) = &j.quantum {
                    offsets.quantum = self.time(q, &jp.key("quantum")).unwrap_or_default();
                }
                if let Some(c) = &j.classical {
                    offsets.classical = self.time(c, &jp.key("classical")).unwrap_or_default();
                }
                jitter.insert(PacketId(j.packet), offsets);
            }
            jitter
        });

        let gate_tolerance = match &raw.gate_tolerance {
            None => Time::ZERO,
            Some(q) => {
                let p = root.key("gate_tolerance");
                let t = self.time(q, &p).unwrap_or_default();
                if t < Time::ZERO {
                    self.fail(&p, format!("gate tolerance must be non-negative, got {t}"));
                }
                t
            }
        };

        if !self.issues.is_empty() {
            return None;
        }
        Some(Scenario {
            medium: medium?,
            links,
            targets,
            pool,
            schedule: EmissionSchedule::new(emissions).ok()?,
            jitter,
            gate_tolerance,
        })
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| {
        let (line, column) = if e.line() == 0 {
            line_col(text, text.len())
        } else {
            (e.line(), e.column().max(1))
        };
        let message = e.to_string();
        // serde_json appends " at line X column Y"; the location is kept separately
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_owned(),
            None => message,
        };
        ScenarioError {
            issues: vec![Issue {
                kind: IssueKind::Parse,
                line,
                column,
                path: String::new(),
                message,
            }],
        }
    })?;
    let mut v = Validator {
        text,
        issues: Vec::new(),
    };
    match v.run(&raw) {
        Some(s) => Ok(s),
        None => {
            let mut issues = v.issues;
            issues.sort_by_key(|i| (i.line, i.column));
            Err(ScenarioError { issues })
        }
    }
}

/// Canonical JSON form: picoseconds and micrometers throughout.
pub fn emit_scenario(s: &Scenario) -> String {
    let delay = |d: &DelayElement| RawDelay {
        id: d.id().as_str().to_owned(),
        duration: TimeQty::ps(d.duration()),
    };
    let raw = RawScenario {
        version: FORMAT_VERSION.to_owned(),
        medium: RawMedium {
            c_vacuum_m_per_s: Some(s.medium.c_vacuum()),
            refraction_index: s.medium.refraction_index().as_f64(),
        },
        links: s
            .links
            .iter()
            .map(|l| RawLink {
                node: l.node_id().as_str().to_owned(),
                quantum_length: LengthQty::um(l.quantum_length()),
                classical_length: LengthQty::um(l.classical_length()),
                delays: l.delays().iter().map(delay).collect(),
            })
            .collect(),
        targets: s
            .targets
            .iter()
            .map(|(n, t)| RawTarget {
                node: n.as_str().to_owned(),
                lead: TimeQty::ps(t.lead()),
            })
            .collect(),
        pool: s
            .pool
            .as_ref()
            .map(|p| p.elements().iter().map(delay).collect()),
        schedule: s
            .schedule
            .emissions()
            .iter()
            .map(|e| RawEmission {
                packet: e.packet_id.0,
                node: e.node_id.as_str().to_owned(),
                emit_time: TimeQty::ps(e.emit_time),
            })
            .collect(),
        jitter: s.jitter.as_ref().map(|j| {
            j.sorted()
                .into_iter()
                .map(|(p, o)| RawJitter {
                    packet: p.0,
                    quantum: Some(TimeQty::ps(o.quantum)),
                    classical: Some(TimeQty::ps(o.classical)),
                })
                .collect()
        }),
        gate_tolerance: Some(TimeQty::ps(s.gate_tolerance)),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("scenario serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "version": "1",
  "medium": { "refraction_index": 1.4682 },
  "links": [
    { "node": "ed",
      "quantum_length": { "value": 2400, "unit": "m" },
      "classical_length": { "value": 1600, "unit": "m" } }
  ],
  "schedule": [ { "packet": 1, "node": "ed", "emit_time": { "value": 0, "unit": "ps" } } ]
}"#;

    fn first_issue(text: &str) -> Issue {
        parse_scenario(text).unwrap_err().issues.remove(0)
    }

    #[test]
    fn minimal_scenario_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.medium.c_vacuum(), C_VACUUM);
        assert_eq!(s.links.len(), 1);
        assert!(s.links[0].delays().is_empty());
        assert!(s.targets.is_empty());
        assert!(s.pool.is_none());
        assert!(s.jitter.is_none());
        assert_eq!(s.gate_tolerance, Time::ZERO);
        assert_eq!(s.schedule.len(), 1);
    }

    #[test]
    fn refraction_out_of_range_is_located() {
        let text = MINIMAL.replace("1.4682", "1.6");
        let issue = first_issue(&text);
        assert_eq!(issue.kind, IssueKind::Validation);
        assert_eq!(issue.path, "medium.refraction_index");
        assert_eq!((issue.line, issue.column), (3, 35));
        assert!(issue.message.contains("1 < n_p < 3/2"), "{}", issue.message);
    }

    #[test]
    fn unknown_node_in_schedule() {
        let text = MINIMAL.replace(r#""node": "ed", "emit"#, r#""node": "bob", "emit"#);
        let issue = first_issue(&text);
        assert_eq!(issue.path, "schedule[0].node");
        assert!(issue.message.contains("`bob`"));
        assert_eq!(issue.line, 9);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace(r#""version": "1","#, r#""version": "1", "colour": 3,"#);
        let issue = first_issue(&text);
        assert_eq!(issue.kind, IssueKind::Parse);
        assert_eq!(issue.line, 2);
        assert!(issue.message.contains("colour"));
    }

    #[test]
    fn syntax_errors_are_located() {
        let issue = first_issue(&MINIMAL[..60]);
        assert_eq!(issue.kind, IssueKind::Parse);
        assert!(issue.line >= 1 && issue.column >= 1);
        let issue = first_issue("");
        assert_eq!((issue.line, issue.column), (1, 1));
    }

    #[test]
    fn unit_conversion() {
        let text = MINIMAL
            .replace(
                r#"{ "value": 0, "unit": "ps" }"#,
                r#"{ "value": 3, "unit": "ns" }"#,
            )
            .replace(
                r#"{ "value": 1600, "unit": "m" }"#,
                r#"{ "value": 7, "unit": "mm" }"#,
            );
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.schedule.emissions()[0].emit_time, Time::from_ps(3000));
        assert_eq!(s.links[0].classical_length(), Length::from_um(7000));
        let bad = MINIMAL.replace(r#""unit": "ps""#, r#""unit": "ms""#);
        assert_eq!(first_issue(&bad).kind, IssueKind::Parse);
    }

    #[test]
    fn collects_every_issue() {
        let text = MINIMAL
            .replace(r#""version": "1""#, r#""version": "2""#)
            .replace("1.4682", "1.0");
        let err = parse_scenario(&text).unwrap_err();
        let paths: Vec<&str> = err.issues.iter().map(|i| i.path.as_str()).collect();
        assert_eq!(paths, ["version", "medium.refraction_index"]);
    }

    #[test]
    fn emit_then_parse_is_identity() {
        let s = parse_scenario(MINIMAL).unwrap();
        let again = parse_scenario(&emit_scenario(&s)).unwrap();
        assert_eq!(s, again);
    }
}
