#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;

use qsync::optimizer::DelayPool;
use qsync::physical::{
    DelayElement, DelayId, Length, MediumProfile, NodeId, NodeLink, RefractiveIndex, Time,
};
use qsync::planner::LeadTarget;
use qsync::scenario::Scenario;
use qsync::sim::{ChannelOffsets, Emission, EmissionSchedule, Jitter, PacketId};

/// `1 < n_p < 1.5` with six decimals, and either the exact or the rounded `c`.
pub fn random_medium<R: Rng>(rng: &mut R) -> MediumProfile {
    let n = RefractiveIndex::from_ratio(1_000_000 + rng.gen_range(1..500_000), 1_000_000).unwrap();
    let c = if rng.gen_bool(0.5) {
        299_792_458
    } else {
        300_000_000
    };
    MediumProfile::new(c, n).unwrap()
}

pub fn delay(id: impl Into<String>, ps: i64) -> DelayElement {
    DelayElement::new(DelayId::new(id), Time::from_ps(ps)).unwrap()
}

/// A link synchronized at a random `T` in [1 us, 1 ms] with up to eight
/// delays of 1 ns to 10 us each, resampled until the delays fit inside `T`.
pub fn random_synchronized_link<R: Rng>(
    rng: &mut R,
    medium: &MediumProfile,
    name: &str,
) -> (NodeLink, Time) {
    loop {
        let t = Time::from_ps(rng.gen_range(Time::PS_PER_US..=1_000 * Time::PS_PER_US));
        let k = rng.gen_range(0..=8);
        let delays: Vec<DelayElement> = (0..k)
            .map(|j| delay(format!("{name}.{j}"), rng.gen_range(1_000..=10_000_000)))
            .collect();
        let total: Time = delays.iter().map(DelayElement::duration).sum();
        if total >= t {
            continue;
        }
        let link = NodeLink::synchronized(NodeId::new(name), t, delays, medium).unwrap();
        return (link, t);
    }
}

/// Random optimizer instance. About a third of the time the original delays
/// are themselves drawn from the pool.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_pool: usize,
    max_duration: i64,
) -> (Vec<DelayElement>, DelayPool, Time) {
    let n = rng.gen_range(1..=max_pool);
    let pool: Vec<DelayElement> = (0..n)
        .map(|i| delay(format!("p{i:02}"), rng.gen_range(1..=max_duration)))
        .collect();
    let k = rng.gen_range(1..=8);
    let original: Vec<DelayElement> = if rng.gen_bool(0.33) {
        let mut picked: Vec<DelayElement> =
            pool.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if picked.is_empty() {
            picked.push(pool[0].clone());
        }
        picked
    } else {
        (0..k)
            .map(|j| delay(format!("o{j}"), rng.gen_range(1..=max_duration)))
            .collect()
    };
    let total: i64 = original.iter().map(|d| d.duration().as_ps()).sum();
    let lead = Time::from_ps(rng.gen_range(0..=total));
    (original, DelayPool::new(pool).unwrap(), lead)
}

/// A valid scenario with random links, targets, pool, schedule and jitter.
pub fn random_scenario<R: Rng>(rng: &mut R) -> Scenario {
    let medium = random_medium(rng);
    let n_links = rng.gen_range(1..=4);
    let mut links = Vec::new();
    for i in 0..n_links {
        let name = format!("node-{i}");
        let link = if rng.gen_bool(0.5) {
            random_synchronized_link(rng, &medium, &name).0
        } else {
            let k = rng.gen_range(0..=3);
            let delays = (0..k)
                .map(|j| delay(format!("{name}.{j}"), rng.gen_range(1..=1_000_000)))
                .collect();
            NodeLink::new(
                NodeId::new(&name),
                Length::from_um(rng.gen_range(0..=10_000_000_000)),
                Length::from_um(rng.gen_range(0..=10_000_000_000)),
                delays,
            )
            .unwrap()
        };
        links.push(link);
    }
    let mut targets = BTreeMap::new();
    for l in &links {
        if rng.gen_bool(0.6) {
            let lead = Time::from_ps(rng.gen_range(0..=5_000_000));
            targets.insert(l.node_id().clone(), LeadTarget::new(lead).unwrap());
        }
    }
    let pool = rng.gen_bool(0.5).then(|| {
        let n = rng.gen_range(1..=6);
        DelayPool::new(
            (0..n)
                .map(|i| delay(format!("pool{i}"), rng.gen_range(1..=10_000_000)))
                .collect(),
        )
        .unwrap()
    });
    let mut emissions = Vec::new();
    let mut t = 0i64;
    for p in 1..=rng.gen_range(0..=12u64) {
        t += rng.gen_range(0..=1_000_000);
        let node = links[rng.gen_range(0..links.len())].node_id().clone();
        emissions.push(Emission {
            emit_time: Time::from_ps(t),
            node_id: node,
            packet_id: PacketId(p * 3),
        });
    }
    let mut jitter = None;
    if rng.gen_bool(0.5) && !emissions.is_empty() {
        let mut j = Jitter::new();
        for e in &emissions {
            if rng.gen_bool(0.5) {
                let offsets = ChannelOffsets {
                    quantum: Time::from_ps(rng.gen_range(-50..=50)),
                    classical: Time::from_ps(rng.gen_range(-50..=50)),
                };
                j.insert(e.packet_id, offsets);
            }
        }
        jitter = Some(j);
    }
    Scenario {
        medium,
        links,
        targets,
        pool,
        schedule: EmissionSchedule::new(emissions).unwrap(),
        jitter,
        gate_tolerance: Time::from_ps(rng.gen_range(0..=10)),
    }
}

pub const BASE_SCENARIO: &str = r#"{
  "version": "1",
  "medium": { "c_vacuum_m_per_s": 300000000, "refraction_index": 1.25 },
  "links": [
    {
      "node": "ed",
      "quantum_length": { "value": 2400, "unit": "m" },
      "classical_length": { "value": 1600, "unit": "m" },
      "delays": [
        { "id": "sw1", "duration": { "value": 1, "unit": "us" } },
        { "id": "sw2", "duration": { "value": 1, "unit": "us" } }
      ]
    }
  ],
  "targets": [ { "node": "ed", "lead": { "value": 1, "unit": "us" } } ],
  "pool": [ { "id": "p1", "duration": { "value": 1, "unit": "us" } } ],
  "schedule": [
    { "packet": 1, "node": "ed", "emit_time": { "value": 0, "unit": "ps" } },
    { "packet": 2, "node": "ed", "emit_time": { "value": 10, "unit": "ns" } }
  ],
  "jitter": [ { "packet": 2, "classical": { "value": 3, "unit": "ps" } } ],
  "gate_tolerance": { "value": 0, "unit": "ps" }
}
"#;

fn swap(from: &str, to: &str) -> String {
    assert!(
        BASE_SCENARIO.contains(from),
        "corpus edit `{from}` does not apply"
    );
    BASE_SCENARIO.replacen(from, to, 1)
}

/// Fifty broken scenario files: syntax damage, type errors, unknown keys,
/// bad units and semantic violations.
pub fn malformed_corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    let len = BASE_SCENARIO.len();
    for cut in [
        0,
        1,
        15,
        60,
        len / 5,
        len / 3,
        len / 2,
        2 * len / 3,
        4 * len / 5,
        len - 3,
    ] {
        out.push((
            format!("truncated at {cut}"),
            BASE_SCENARIO[..cut].to_string(),
        ));
    }
    let edits: &[(&str, &str, &str)] = &[
        ("missing comma", r#""version": "1","#, r#""version": "1""#),
        (
            "trailing comma",
            r#""unit": "ps" }
}"#,
            r#""unit": "ps" },
}"#,
        ),
        ("single quotes", r#""version": "1""#, r#"'version': '1'"#),
        (
            "bare word",
            r#""unit": "m" },
      "classical"#,
            r#""unit": m },
      "classical"#,
        ),
        ("unclosed string", r#""node": "ed","#, r#""node": "ed,"#),
        (
            "version is a number",
            r#""version": "1""#,
            r#""version": 1"#,
        ),
        ("version 2", r#""version": "1""#, r#""version": "2""#),
        ("refraction as string", "1.25", r#""1.25""#),
        (
            "length as float",
            r#""value": 2400,"#,
            r#""value": 2400.5,"#,
        ),
        (
            "length as string",
            r#""value": 2400,"#,
            r#""value": "2400","#,
        ),
        ("links not an array", r#""links": ["#, r#""links": {"x": ["#),
        ("packet negative", r#""packet": 1,"#, r#""packet": -1,"#),
        (
            "unknown top-level key",
            r#""version": "1","#,
            r#""version": "1", "extra": true,"#,
        ),
        (
            "unknown medium key",
            r#""refraction_index": 1.25"#,
            r#""refraction_index": 1.25, "n_f": 1.5"#,
        ),
        (
            "unknown link key",
            r#""node": "ed","#,
            r#""node": "ed", "colour": "red","#,
        ),
        (
            "unknown delay key",
            r#""id": "sw1","#,
            r#""id": "sw1", "kind": "switch","#,
        ),
        (
            "unknown unit key",
            r#""value": 0, "unit": "ps" } },"#,
            r#""value": 0, "unit": "ps", "x": 1 } },"#,
        ),
        (
            "unknown time unit",
            r#""value": 1, "unit": "us" } },
        { "id": "sw2""#,
            r#""value": 1, "unit": "s" } },
        { "id": "sw2""#,
        ),
        (
            "unknown length unit",
            r#""unit": "m" },
      "classical"#,
            r#""unit": "km" },
      "classical"#,
        ),
        (
            "time unit on length",
            r#""value": 1600, "unit": "m""#,
            r#""value": 1600, "unit": "us""#,
        ),
        (
            "length unit on time",
            r#""value": 10, "unit": "ns""#,
            r#""value": 10, "unit": "mm""#,
        ),
        ("n at 1.6", "1.25", "1.6"),
        ("n at 1.5", "1.25", "1.5"),
        ("n at 1.0", "1.25", "1.0"),
        ("n negative", "1.25", "-1.25"),
        ("c zero", "300000000", "0"),
        (
            "negative quantum length",
            r#""value": 2400"#,
            r#""value": -2400"#,
        ),
        (
            "negative classical length",
            r#""value": 1600"#,
            r#""value": -1600"#,
        ),
        (
            "zero delay",
            r#""value": 1, "unit": "us" } },
        { "id": "sw2""#,
            r#""value": 0, "unit": "us" } },
        { "id": "sw2""#,
        ),
        (
            "negative delay",
            r#""value": 1, "unit": "us" } }
      ]"#,
            r#""value": -1, "unit": "us" } }
      ]"#,
        ),
        (
            "duplicate link node",
            r#""links": ["#,
            r#""links": [
    { "node": "ed", "quantum_length": { "value": 1, "unit": "m" },
      "classical_length": { "value": 1, "unit": "m" }, "delays": [] },"#,
        ),
        (
            "target for unknown node",
            r#""targets": [ { "node": "ed""#,
            r#""targets": [ { "node": "bob""#,
        ),
        (
            "negative lead",
            r#""lead": { "value": 1"#,
            r#""lead": { "value": -1"#,
        ),
        (
            "schedule unknown node",
            r#""packet": 2, "node": "ed""#,
            r#""packet": 2, "node": "zed""#,
        ),
        (
            "duplicate packet",
            r#""packet": 2, "node""#,
            r#""packet": 1, "node""#,
        ),
        (
            "emission out of order",
            r#""value": 10, "unit": "ns""#,
            r#""value": -10, "unit": "ns""#,
        ),
        (
            "jitter unknown packet",
            r#""jitter": [ { "packet": 2"#,
            r#""jitter": [ { "packet": 9"#,
        ),
        (
            "duplicate pool id",
            r#""pool": [ { "id": "p1", "duration": { "value": 1, "unit": "us" } } ]"#,
            r#""pool": [ { "id": "p1", "duration": { "value": 1, "unit": "us" } }, { "id": "p1", "duration": { "value": 2, "unit": "us" } } ]"#,
        ),
        (
            "zero pool delay",
            r#""id": "p1", "duration": { "value": 1"#,
            r#""id": "p1", "duration": { "value": 0"#,
        ),
        (
            "negative gate tolerance",
            r#""gate_tolerance": { "value": 0"#,
            r#""gate_tolerance": { "value": -4"#,
        ),
    ];
    for (name, from, to) in edits {
        out.push((name.to_string(), swap(from, to)));
    }
    out
}
