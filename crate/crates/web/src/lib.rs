//! wasm-bindgen exports for the static demo page in `www/`.

use wasm_bindgen::prelude::*;

use magicbench::pipeline::noisy_t_density;
use magicbench::protocols::{bell_odd_probability, plan_samples, Scheme};
use magicbench::twirling::{twirl_report, MagicState};

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Applicability report for `T`, `H`, `CZ` or `CCZ` as JSON.
#[wasm_bindgen(js_name = twirlCheck)]
pub fn twirl_check(state: &str) -> Result<String, JsValue> {
    let state: MagicState = state.parse().map_err(js_err)?;
    let rep = twirl_report(state).map_err(js_err)?;
    serde_json::to_string(&rep).map_err(js_err)
}

/// Planned sample counts as JSON. `state` only matters for single-copy.
#[wasm_bindgen(js_name = planSamples)]
pub fn plan(scheme: &str, r: f64, delta: f64, epsilon: f64, state: &str) -> Result<String, JsValue> {
    let scheme: Scheme = scheme.parse().map_err(js_err)?;
    let dims = if scheme == Scheme::SingleCopy {
        let rep = twirl_report(state.parse().map_err(js_err)?).map_err(js_err)?;
        if !rep.single_copy {
            return Err(JsValue::from_str("single-copy scheme does not apply to this state"));
        }
        rep.witness_dims
    } else {
        Vec::new()
    };
    let plan = plan_samples(r, delta, epsilon, scheme, &dims).map_err(js_err)?;
    serde_json::to_string(&plan).map_err(js_err)
}

/// Exact odd-parity probability of a Bell round on two copies of a twirled
/// `|T>` with infidelity `epsilon`.
#[wasm_bindgen(js_name = bellOddProbability)]
pub fn bell_odd(epsilon: f64) -> Result<f64, JsValue> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(JsValue::from_str("epsilon must lie in [0, 1]"));
    }
    let rho = noisy_t_density(epsilon).map_err(js_err)?;
    bell_odd_probability(&rho, &rho).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exports_work_natively() {
        let rep: serde_json::Value = serde_json::from_str(&twirl_check("cz").unwrap()).unwrap();
        assert_eq!(rep["dims"], serde_json::json!([1, 1, 2]));
        assert_eq!(rep["single_copy"], true);
        let plan: serde_json::Value =
            serde_json::from_str(&plan("bell", 0.5, 0.32, 0.01, "CCZ").unwrap()).unwrap();
        assert_eq!(plan["total_copies"], 2200);
        let p = bell_odd(0.05).unwrap();
        assert!((p - 0.05 * 0.95).abs() < 1e-12);
    }
}
