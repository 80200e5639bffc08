//! Browser bindings for the qsync demo page.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// JSON `{quantum_m, classical_m, points: [{lead_ns, classical_m, pmf_m}]}`.
#[wasm_bindgen(js_name = planCurve)]
pub fn plan_curve(
    c_m_per_s: u32,
    n_p: f64,
    transit_ns: i32,
    delays_ns: &str,
    max_lead_ns: i32,
    steps: u32,
) -> Result<String, JsValue> {
    js(demo::plan_curve(
        c_m_per_s,
        n_p,
        transit_ns.into(),
        delays_ns,
        max_lead_ns.into(),
        steps,
    ))
}

/// JSON `{chosen: [{id, ns}], original_ns, retained_ns, saving_ns, slack_ns}`.
#[wasm_bindgen]
pub fn reselect(original_ns: &str, pool_ns: &str, lead_ns: i32) -> Result<String, JsValue> {
    js(demo::reselect(original_ns, pool_ns, lead_ns.into()))
}

/// JSON `{continued, dropped, mean_t_delta_ps, histogram: [[t_delta_ps, count]]}`.
#[wasm_bindgen(js_name = gateSweep)]
pub fn gate_sweep(
    packets: u32,
    jitter_ps: u32,
    tolerance_ps: u32,
    seed: u32,
) -> Result<String, JsValue> {
    js(demo::gate_sweep(packets, jitter_ps, tolerance_ps, seed))
}
