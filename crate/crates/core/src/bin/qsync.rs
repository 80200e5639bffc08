use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qsync::optimizer::SelectOptions;
use qsync::planner::{
    plan_lengthen_pmf, plan_replace_delays, plan_shorten_classical, PlanError, SyncPlan,
};
use qsync::report::{emit_plans_csv, emit_report, ReportFormat, SyncReport};
use qsync::scenario::{load_scenario, LoadError, Scenario};
use qsync::sim::{run_sync_loop, simulate, EmissionSchedule, SyncGate};
use qsync::{NodeId, Time};

const EXIT_MISMATCH: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "qsync",
    version,
    about = "Plan and check quantum/classical channel synchronization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-node synchronization plans for every lead target
    Plan {
        #[arg(value_enum)]
        model: Model,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate the scenario as written and gate every packet
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tolerance_ps: Option<i64>,
    },
    /// Plan, apply, simulate, and check every packet arrives with the predicted gap
    Verify {
        #[arg(long, value_enum, default_value = "linear")]
        model: Model,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tolerance_ps: Option<i64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Restrict to one node
    #[arg(long)]
    node: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    /// Shorten the classical fiber
    Linear,
    /// Lengthen the polarization-maintaining fiber
    Pmf,
    /// Reroute through an optimal delay subset
    Delays,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    load_scenario(path).map_err(|e| match e {
        LoadError::Io { .. } => Failure::new(EXIT_IO, e.to_string()),
        LoadError::Invalid { path, source } => {
            let lines: Vec<String> = source
                .issues
                .iter()
                .map(|i| format!("{path}:{i}"))
                .collect();
            Failure::new(EXIT_INVALID, lines.join("\n"))
        }
    })
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn node_filter(s: &Scenario, node: Option<&str>) -> Result<Option<NodeId>, Failure> {
    let Some(n) = node else { return Ok(None) };
    let id = NodeId::new(n);
    if s.link(&id).is_none() {
        return Err(Failure::new(EXIT_INVALID, format!("unknown node `{n}`")));
    }
    Ok(Some(id))
}

fn make_plans(s: &Scenario, model: Model, only: Option<&NodeId>) -> Result<Vec<SyncPlan>, Failure> {
    if let Some(n) = only {
        if !s.targets.contains_key(n) {
            return Err(Failure::new(
                EXIT_INVALID,
                format!("node `{n}` has no lead target"),
            ));
        }
    }
    let pool = match model {
        Model::Delays => Some(
            s.effective_pool()
                .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?,
        ),
        _ => None,
    };
    let mut plans = Vec::new();
    let mut errors: Vec<PlanError> = Vec::new();
    for (node, &target) in &s.targets {
        if only.is_some_and(|n| n != node) {
            continue;
        }
        let link = s.link(node).expect("targets reference existing links");
        let plan = match model {
            Model::Linear => plan_shorten_classical(link, &s.medium, target),
            Model::Pmf => plan_lengthen_pmf(link, &s.medium, target),
            Model::Delays => plan_replace_delays(
                link,
                &s.medium,
                pool.as_ref().expect("pool built for delay model"),
                target,
                &SelectOptions::default(),
            ),
        };
        match plan {
            Ok(p) => plans.push(p),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        let msg: Vec<String> = errors
            .iter()
            .map(|e| format!("infeasible plan: {e}"))
            .collect();
        return Err(Failure::new(EXIT_INFEASIBLE, msg.join("\n")));
    }
    Ok(plans)
}

fn filtered_schedule(s: &Scenario, keep: impl Fn(&NodeId) -> bool) -> EmissionSchedule {
    let emissions = s
        .schedule
        .emissions()
        .iter()
        .filter(|e| keep(&e.node_id))
        .cloned()
        .collect();
    EmissionSchedule::new(emissions).expect("a subsequence of a valid schedule is valid")
}

fn gate(s: &Scenario, tolerance_ps: Option<i64>) -> Result<SyncGate, Failure> {
    let tolerance = tolerance_ps.map(Time::from_ps).unwrap_or(s.gate_tolerance);
    if tolerance < Time::ZERO {
        return Err(Failure::new(
            EXIT_INVALID,
            "gate tolerance must be non-negative",
        ));
    }
    Ok(SyncGate::with_tolerance(tolerance))
}

fn report_format(f: Format) -> ReportFormat {
    match f {
        Format::Json => ReportFormat::Json,
        Format::Csv => ReportFormat::Csv,
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Plan { model, common } => {
            let s = load(&common.scenario)?;
            let only = node_filter(&s, common.node.as_deref())?;
            let plans = make_plans(&s, model, only.as_ref())?;
            let text = match common.format {
                Format::Json => emit_report(&SyncReport::from_plans(plans), ReportFormat::Json),
                Format::Csv => emit_plans_csv(&plans),
            };
            write_out(common.out.as_deref(), &text)
        }
        Command::Simulate {
            common,
            tolerance_ps,
        } => {
            let s = load(&common.scenario)?;
            let only = node_filter(&s, common.node.as_deref())?;
            let gate = gate(&s, tolerance_ps)?;
            let schedule = filtered_schedule(&s, |n| only.as_ref().is_none_or(|o| o == n));
            let events = simulate(&s.links, &s.medium, &schedule, s.jitter.as_ref())
                .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
            let run = run_sync_loop(&events, gate);
            let report = SyncReport::new(vec![], &events, &run);
            write_out(
                common.out.as_deref(),
                &emit_report(&report, report_format(common.format)),
            )
        }
        Command::Verify {
            model,
            common,
            tolerance_ps,
        } => {
            let s = load(&common.scenario)?;
            let only = node_filter(&s, common.node.as_deref())?;
            let gate = gate(&s, tolerance_ps)?;
            let plans = make_plans(&s, model, only.as_ref())?;
            let predicted: HashMap<&NodeId, Time> = plans
                .iter()
                .map(|p| (&p.node_id, p.predicted_gap))
                .collect();
            let links: Vec<_> = s
                .links
                .iter()
                .map(|l| match plans.iter().find(|p| &p.node_id == l.node_id()) {
                    Some(p) => p.apply(l),
                    None => l.clone(),
                })
                .collect();
            // jitter is left out: the check is about the plan alone
            let schedule = filtered_schedule(&s, |n| predicted.contains_key(n));
            let events = simulate(&links, &s.medium, &schedule, None)
                .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
            let mismatches: Vec<String> = events
                .iter()
                .filter(|e| -e.t_delta != predicted[&e.node_id])
                .map(|e| {
                    format!(
                        "packet {} to `{}`: achieved gap {}, predicted {}",
                        e.packet_id, e.node_id, -e.t_delta, predicted[&e.node_id]
                    )
                })
                .collect();
            let run = run_sync_loop(&events, gate);
            let report = SyncReport::new(plans, &events, &run);
            write_out(
                common.out.as_deref(),
                &emit_report(&report, report_format(common.format)),
            )?;
            if mismatches.is_empty() {
                eprintln!(
                    "verified {} packets: achieved gap equals predicted gap",
                    events.len()
                );
                Ok(())
            } else {
                Err(Failure::new(EXIT_MISMATCH, mismatches.join("\n")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
