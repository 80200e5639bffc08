//! Run reports and their JSON/CSV serializations.

use serde::{Deserialize, Serialize};

use crate::physical::{NodeId, Time};
use crate::planner::SyncPlan;
use crate::sim::{GateRun, NodeGateStats, PacketId, TransitEvent, Verdict};

pub const EVENT_CSV_HEADER: [&str; 6] = [
    "packet_id",
    "node_id",
    "t_qa_ps",
    "t_ca_ps",
    "t_delta_ps",
    "verdict",
];

pub const PLAN_CSV_HEADER: [&str; 7] = [
    "node_id",
    "model",
    "new_quantum_length_um",
    "new_classical_length_um",
    "chosen_delays",
    "predicted_gap_ps",
    "slack_ps",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// One gated packet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRecord {
    pub packet_id: PacketId,
    pub node_id: NodeId,
    pub t_qa_ps: Time,
    pub t_ca_ps: Time,
    pub t_delta_ps: Time,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSummary {
    pub node_id: NodeId,
    pub stats: NodeGateStats,
}

/// Spread of the over-saving across delay-replacement plans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlackStats {
    pub count: u64,
    pub min_ps: Time,
    pub max_ps: Time,
    pub sum_ps: i128,
}

impl SlackStats {
    fn from_plans(plans: &[SyncPlan]) -> Option<Self> {
        let slacks: Vec<Time> = plans
            .iter()
            .filter(|p| p.chosen_delays.is_some())
            .map(|p| p.slack)
            .collect();
        Some(SlackStats {
            count: slacks.len() as u64,
            min_ps: *slacks.iter().min()?,
            max_ps: *slacks.iter().max()?,
            sum_ps: slacks.iter().map(|t| t.as_ps() as i128).sum(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncReport {
    pub plans: Vec<SyncPlan>,
    pub events: Vec<EventRecord>,
    pub nodes: Vec<NodeSummary>,
    pub totals: NodeGateStats,
    pub slack: Option<SlackStats>,
}

impl SyncReport {
    pub fn from_plans(plans: Vec<SyncPlan>) -> Self {
        let slack = SlackStats::from_plans(&plans);
        SyncReport {
            plans,
            slack,
            ..Default::default()
        }
    }

    /// `events` and `run` must come from the same stream, in the same order.
    pub fn new(plans: Vec<SyncPlan>, events: &[TransitEvent], run: &GateRun) -> Self {
        assert_eq!(events.len(), run.decisions.len(), "one decision per event");
        let records = events
            .iter()
            .zip(&run.decisions)
            .map(|(e, d)| EventRecord {
                packet_id: e.packet_id,
                node_id: e.node_id.clone(),
                t_qa_ps: e.t_qa,
                t_ca_ps: e.t_ca,
                t_delta_ps: e.t_delta,
                verdict: d.verdict,
            })
            .collect();
        let nodes = run
            .per_node
            .iter()
            .map(|(n, s)| NodeSummary {
                node_id: n.clone(),
                stats: s.clone(),
            })
            .collect();
        let slack = SlackStats::from_plans(&plans);
        SyncReport {
            plans,
            events: records,
            nodes,
            totals: run.totals(),
            slack,
        }
    }
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(&row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

/// Per-packet CSV with a fixed column set; an empty report is the header only.
pub fn emit_events_csv(report: &SyncReport) -> String {
    csv_text(
        &EVENT_CSV_HEADER,
        report.events.iter().map(|e| {
            vec![
                e.packet_id.to_string(),
                e.node_id.to_string(),
                e.t_qa_ps.as_ps().to_string(),
                e.t_ca_ps.as_ps().to_string(),
                e.t_delta_ps.as_ps().to_string(),
                e.verdict.to_string(),
            ]
        }),
    )
}

/// One row per plan; unchanged lengths are left blank and chosen delay ids
/// are `;`-separated.
pub fn emit_plans_csv(plans: &[SyncPlan]) -> String {
    let opt = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
    csv_text(
        &PLAN_CSV_HEADER,
        plans.iter().map(|p| {
            vec![
                p.node_id.to_string(),
                p.model.to_string(),
                opt(p.new_quantum_length.map(|l| l.as_um())),
                opt(p.new_classical_length.map(|l| l.as_um())),
                p.chosen_delays
                    .as_ref()
                    .map(|ds| {
                        ds.iter()
                            .map(|d| d.id().as_str())
                            .collect::<Vec<_>>()
                            .join(";")
                    })
                    .unwrap_or_default(),
                p.predicted_gap.as_ps().to_string(),
                p.slack.as_ps().to_string(),
            ]
        }),
    )
}

pub fn emit_report(report: &SyncReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => emit_events_csv(report),
    }
}

pub fn parse_report_json(text: &str) -> Result<SyncReport, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_sync_loop, SyncGate};

    fn events() -> Vec<TransitEvent> {
        vec![
            TransitEvent::new(
                PacketId(1),
                NodeId::new("ed"),
                Time::from_ps(10),
                Time::from_ps(10),
            ),
            TransitEvent::new(
                PacketId(2),
                NodeId::new("ed, jr"),
                Time::from_ps(10),
                Time::from_ps(12),
            ),
        ]
    }

    fn report() -> SyncReport {
        let ev = events();
        let run = run_sync_loop(&ev, SyncGate::default());
        SyncReport::new(vec![], &ev, &run)
    }

    #[test]
    fn empty_report_csv_is_header_only() {
        let csv = emit_report(&SyncReport::default(), ReportFormat::Csv);
        assert_eq!(
            csv,
            "packet_id,node_id,t_qa_ps,t_ca_ps,t_delta_ps,verdict\n"
        );
    }

    #[test]
    fn single_continue_row() {
        let ev = &events()[..1];
        let run = run_sync_loop(ev, SyncGate::default());
        let csv = emit_report(&SyncReport::new(vec![], ev, &run), ReportFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "1,ed,10,10,0,continue");
    }

    #[test]
    fn csv_quotes_awkward_ids() {
        let csv = emit_report(&report(), ReportFormat::Csv);
        assert!(csv.contains("2,\"ed, jr\",10,12,2,drop"), "{csv}");
    }

    #[test]
    fn emission_is_deterministic_and_round_trips() {
        let r = report();
        let a = emit_report(&r, ReportFormat::Json);
        let b = emit_report(&r, ReportFormat::Json);
        assert_eq!(a, b);
        assert_eq!(
            emit_report(&r, ReportFormat::Csv),
            emit_report(&r, ReportFormat::Csv)
        );
        assert_eq!(parse_report_json(&a).unwrap(), r);
        assert_eq!(r.totals.dropped, 1);
        assert_eq!(r.nodes.len(), 2);
    }
}
