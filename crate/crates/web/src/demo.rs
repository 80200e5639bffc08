//! The demo operations in plain Rust. Each returns a JSON string so the
//! browser side only needs `JSON.parse`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qsync::optimizer::{select_delays, DelayPool};
use qsync::physical::{DelayElement, DelayId, MediumProfile, RefractiveIndex, C_VACUUM};
use qsync::planner::{plan_lengthen_pmf, plan_shorten_classical, LeadTarget};
use qsync::sim::{
    run_sync_loop, simulate, ChannelOffsets, EmissionSchedule, Jitter, PacketId, SyncGate,
};
use qsync::{NodeId, NodeLink, Time};

fn medium(c_m_per_s: u32, n_p: f64) -> Result<MediumProfile, String> {
    let n = RefractiveIndex::from_f64(n_p).map_err(|e| e.to_string())?;
    MediumProfile::new(c_m_per_s.into(), n).map_err(|e| e.to_string())
}

/// Parses `"3, 5,7"` into delays named `prefix1, prefix2, ...`, in ns.
fn parse_delays(list: &str, prefix: &str) -> Result<Vec<DelayElement>, String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, s)| {
            let ns: i64 = s
                .parse()
                .map_err(|_| format!("`{s}` is not a whole number of ns"))?;
            DelayElement::new(
                DelayId::new(format!("{prefix}{}", i + 1)),
                Time::from_ns(ns),
            )
            .map_err(|e| e.to_string())
        })
        .collect()
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("demo output serializes")
}

#[derive(Serialize)]
struct CurvePoint {
    lead_ns: f64,
    /// `None` once the classical fiber would vanish.
    classical_m: Option<f64>,
    pmf_m: f64,
}

#[derive(Serialize)]
struct Curve {
    quantum_m: f64,
    classical_m: f64,
    points: Vec<CurvePoint>,
}

/// Cable lengths needed by both length models as the lead grows from zero
/// to `max_lead_ns`, for a link synchronized at `transit_ns`.
pub fn plan_curve(
    c_m_per_s: u32,
    n_p: f64,
    transit_ns: i64,
    delays_ns: &str,
    max_lead_ns: i64,
    steps: u32,
) -> Result<String, String> {
    let medium = medium(c_m_per_s, n_p)?;
    let delays = parse_delays(delays_ns, "d")?;
    let link = NodeLink::synchronized(
        NodeId::new("demo"),
        Time::from_ns(transit_ns),
        delays,
        &medium,
    )
    .map_err(|e| e.to_string())?;
    if max_lead_ns < 0 || steps == 0 {
        return Err("lead range must be non-negative with at least one step".into());
    }
    let max_ps = Time::from_ns(max_lead_ns).as_ps();
    let points = (0..=steps)
        .map(|i| {
            let lead = Time::from_ps(max_ps * i as i64 / steps as i64);
            let target = LeadTarget::new(lead).expect("non-negative lead");
            let classical = plan_shorten_classical(&link, &medium, target)
                .ok()
                .map(|p| p.apply(&link).classical_length().as_m_f64());
            let pmf = plan_lengthen_pmf(&link, &medium, target)
                .map_err(|e| e.to_string())?
                .apply(&link)
                .quantum_length()
                .as_m_f64();
            Ok(CurvePoint {
                lead_ns: lead.as_ps() as f64 / 1e3,
                classical_m: classical,
                pmf_m: pmf,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(json(&Curve {
        quantum_m: link.quantum_length().as_m_f64(),
        classical_m: link.classical_length().as_m_f64(),
        points,
    }))
}

#[derive(Serialize)]
struct Chosen {
    id: String,
    ns: f64,
}

#[derive(Serialize)]
struct Reselection {
    chosen: Vec<Chosen>,
    original_ns: f64,
    retained_ns: f64,
    saving_ns: f64,
    slack_ns: f64,
}

/// Optimal replacement delays: originals and pool as comma-separated ns.
pub fn reselect(original_ns: &str, pool_ns: &str, lead_ns: i64) -> Result<String, String> {
    let original = parse_delays(original_ns, "o")?;
    let pool = DelayPool::new(parse_delays(pool_ns, "p")?).map_err(|e| e.to_string())?;
    let target = LeadTarget::new(Time::from_ns(lead_ns)).map_err(|e| e.to_string())?;
    let sel = select_delays(&original, &pool, target).map_err(|e| e.to_string())?;
    let ns = |t: Time| t.as_ps() as f64 / 1e3;
    Ok(json(&Reselection {
        chosen: sel
            .chosen
            .iter()
            .map(|d| Chosen {
                id: d.id().to_string(),
                ns: ns(d.duration()),
            })
            .collect(),
        original_ns: ns(sel.original_total),
        retained_ns: ns(sel.retained_total),
        saving_ns: ns(sel.saving),
        slack_ns: ns(sel.slack),
    }))
}

#[derive(Serialize)]
struct Sweep {
    continued: u64,
    dropped: u64,
    mean_t_delta_ps: Option<f64>,
    /// `(t_delta_ps, count)`, ascending.
    histogram: Vec<(i64, u64)>,
}

/// Sends `packets` through a synchronized link with uniform jitter of up to
/// `jitter_ps` on each channel, then gates them.
pub fn gate_sweep(
    packets: u32,
    jitter_ps: u32,
    tolerance_ps: u32,
    seed: u32,
) -> Result<String, String> {
    let medium = medium(C_VACUUM as u32, 1.25)?;
    let node = NodeId::new("demo");
    let link = NodeLink::synchronized(node.clone(), Time::from_us(10), vec![], &medium)
        .map_err(|e| e.to_string())?;
    let schedule =
        EmissionSchedule::periodic(&node, Time::ZERO, Time::from_ns(1), packets.into(), 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.into());
    let j = i64::from(jitter_ps);
    let jitter: Jitter = (0..u64::from(packets))
        .map(|p| {
            let offsets = ChannelOffsets {
                quantum: Time::from_ps(rng.gen_range(-j..=j)),
                classical: Time::from_ps(rng.gen_range(-j..=j)),
            };
            (PacketId(p), offsets)
        })
        .collect();
    let events = simulate(&[link], &medium, &schedule, Some(&jitter)).map_err(|e| e.to_string())?;
    let run = run_sync_loop(
        &events,
        SyncGate::with_tolerance(Time::from_ps(tolerance_ps.into())),
    );
    let mut histogram = BTreeMap::new();
    for e in &events {
        *histogram.entry(e.t_delta.as_ps()).or_insert(0u64) += 1;
    }
    let totals = run.totals();
    Ok(json(&Sweep {
        continued: totals.continued,
        dropped: totals.dropped,
        mean_t_delta_ps: totals.mean.as_f64(),
        histogram: histogram.into_iter().collect(),
    }))
}
