//! Browser bindings for three small experiments. Each entry point returns a
//! JSON string; the `*_json` functions hold the logic so they run natively too.

use decoupling_core::channel::{purified_output, BuiltinParams};
use decoupling_core::decoupling::{exact_haar_average_hs, mc_average, oneshot_bound, DecouplingInstance, Metric};
use decoupling_core::typicality::{flatten_code, verify_typ_bounds};
use decoupling_core::{coherent_information, Channel, DensityOperator, SeededSource, TensorSpace};
use serde::Serialize;
use wasm_bindgen::prelude::*;

type Result<T> = std::result::Result<T, String>;

fn builtin(name: &str, d: usize, p: f64) -> Result<Channel> {
    let params = BuiltinParams {
        d: Some(d),
        p: Some(p),
        gamma: Some(p),
    };
    Channel::builtin(name, &params).map_err(|e| e.to_string())
}

fn maximally_mixed(d: usize) -> Result<DensityOperator> {
    Ok(DensityOperator::maximally_mixed(TensorSpace::single("A'", d).map_err(|e| e.to_string())?))
}

#[derive(Serialize)]
struct Curve {
    channel: String,
    d: usize,
    p: Vec<f64>,
    coherent_information: Vec<f64>,
}

/// `I_c(π, N_p)` on `points` evenly spaced noise parameters in `[0, 1]`.
pub fn coherent_information_curve_json(channel: &str, d: usize, points: usize) -> Result<String> {
    if !(2..=1001).contains(&points) {
        return Err("points must lie in 2..=1001".into());
    }
    let phi = maximally_mixed(if matches!(channel, "dephasing" | "amplitude_damping") { 2 } else { d })?;
    let mut curve = Curve {
        channel: channel.into(),
        d: phi.dim(),
        p: Vec::with_capacity(points),
        coherent_information: Vec::with_capacity(points),
    };
    for i in 0..points {
        let p = i as f64 / (points - 1) as f64;
        let ch = builtin(channel, phi.dim(), p)?;
        curve.p.push(p);
        curve.coherent_information.push(coherent_information(&phi, &ch).map_err(|e| e.to_string())?);
    }
    serde_json::to_string(&curve).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct CodeDimPoint {
    r_dim: usize,
    exact_hs: f64,
    trace_mean: f64,
    trace_stderr: f64,
    oneshot_bound: f64,
}

#[derive(Serialize)]
struct CodeDimSweep {
    s_dim: usize,
    e_dim: usize,
    purity: f64,
    points: Vec<CodeDimPoint>,
}

/// Decoupling of a random `Ψ^{SE}` as the code dimension `|R|` grows.
pub fn decoupling_sweep_json(s_dim: usize, e_dim: usize, samples: usize, seed: u64) -> Result<String> {
    if !(2..=8).contains(&s_dim) || !(1..=4).contains(&e_dim) || !(2..=2000).contains(&samples) {
        return Err("need 2 ≤ |S| ≤ 8, 1 ≤ |E| ≤ 4 and 2 ≤ samples ≤ 2000".into());
    }
    let kraus = s_dim.div_ceil(e_dim);
    let base = DecouplingInstance::random(s_dim, e_dim, kraus, 1, &mut SeededSource::new(seed).rng()).map_err(|e| e.to_string())?;
    let mut points = Vec::with_capacity(s_dim);
    for r in 1..=s_dim {
        let inst = base.with_code_dim(r).map_err(|e| e.to_string())?;
        let exact = exact_haar_average_hs(&inst).map_err(|e| e.to_string())?;
        let mc = mc_average(&inst, Metric::Trace, samples, &SeededSource::with_stream(seed, r as u64)).map_err(|e| e.to_string())?;
        points.push(CodeDimPoint {
            r_dim: r,
            exact_hs: exact.exact,
            trace_mean: mc.mean,
            trace_stderr: mc.stderr,
            oneshot_bound: oneshot_bound(&inst),
        });
    }
    let sweep = CodeDimSweep {
        s_dim,
        e_dim,
        purity: base.purity(),
        points,
    };
    serde_json::to_string(&sweep).map_err(|e| e.to_string())
}

/// Typical-subspace flattening report for a qubit channel at `φ = π`.
pub fn typicality_report_json(channel: &str, p: f64, n: usize, delta: f64) -> Result<String> {
    if !(1..=6).contains(&n) {
        return Err("block length must lie in 1..=6".into());
    }
    let ch = builtin(channel, 2, p)?;
    let psi = purified_output(&maximally_mixed(2)?, &ch).map_err(|e| e.to_string())?;
    let code = flatten_code(&psi, n, delta).map_err(|e| e.to_string())?;
    serde_json::to_string(&verify_typ_bounds(&code)).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = coherentInformationCurve)]
pub fn coherent_information_curve(channel: &str, d: usize, points: usize) -> std::result::Result<String, JsError> {
    coherent_information_curve_json(channel, d, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = decouplingSweep)]
pub fn decoupling_sweep(s_dim: usize, e_dim: usize, samples: usize, seed: u64) -> std::result::Result<String, JsError> {
    decoupling_sweep_json(s_dim, e_dim, samples, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = typicalityReport)]
pub fn typicality_report(channel: &str, p: f64, n: usize, delta: f64) -> std::result::Result<String, JsError> {
    typicality_report_json(channel, p, n, delta).map_err(|e| JsError::new(&e))
}
