//! Browser bindings: metric bounds on the ball, Dini integrals, and bundled
//! scenario reports.  Everything crosses the boundary as JSON text.

use kobex_core::domains::{ball, directional_distance_bruteforce};
use kobex_core::metrics::{graham_from_directional, kob_metric_ball_exact};
use kobex_core::regularity::{dini_integral, DiniIntegral, ModulusOfContinuity};
use kobex_core::scenarios::{run_scenario, RunOptions};
use kobex_core::{c, CPoint};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn pair_point(xs: &[f64]) -> Result<CPoint, JsValue> {
    if xs.len() != 4 {
        return Err(js_err(format!("expected 4 reals (z1 re, z1 im, z2 re, z2 im), got {}", xs.len())));
    }
    Ok(CPoint(vec![c(xs[0], xs[1]), c(xs[2], xs[3])]))
}

/// Graham sandwich at `z` in direction `v` on the unit ball of C², next to
/// the exact metric.
#[wasm_bindgen]
pub fn ball_metric(z: &[f64], v: &[f64]) -> Result<String, JsValue> {
    let (z, v) = (pair_point(z)?, pair_point(v)?);
    let b = ball(2);
    let dv = directional_distance_bruteforce(&b, &z, &v).map_err(js_err)?;
    let (lo, hi) = graham_from_directional(&z, &v, dv);
    let exact = kob_metric_ball_exact(&z, &v).map_err(js_err)?;
    Ok(json!({ "delta_v": dv, "lower": lo.value, "exact": exact, "upper": hi.value }).to_string())
}

/// `∫₀^ε ω(r)/r dr` for an expression in `r`.
#[wasm_bindgen]
pub fn dini(modulus: &str, eps: f64) -> Result<String, JsValue> {
    let w = ModulusOfContinuity::from_expr(modulus, eps.max(1.0)).map_err(js_err)?;
    let out = match dini_integral(&w, eps).map_err(js_err)? {
        DiniIntegral::Finite { value, error, tail, .. } => {
            json!({ "finite": true, "value": value, "error": error, "tail": tail })
        }
        DiniIntegral::Divergent {
            partial_sum, decay_exponent, ..
        } => json!({ "finite": false, "partial_sum": partial_sum, "decay_exponent": decay_exponent }),
    };
    Ok(out.to_string())
}

/// Line-delimited JSON report of a bundled scenario.
#[wasm_bindgen]
pub fn scenario_report(name: &str, seed: u32) -> Result<String, JsValue> {
    let opts = RunOptions {
        seed: seed as u64,
        tol: None,
    };
    Ok(run_scenario(name, opts).map_err(js_err)?.to_jsonl())
}
