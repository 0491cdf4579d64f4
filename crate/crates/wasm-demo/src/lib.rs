//! Browser bindings for three quick computations: the layer profile ω, the Willmore sphere
//! radius γₙ(t) and the biharmonic heat-kernel profile fₙ(s).
//!
//! Every function returns a flat array of interleaved (x, y) pairs so that JavaScript can plot
//! it without further conversion.

use wasm_bindgen::prelude::*;
use wch::geometry;
use wch::kernels;
use wch::layer::build_layer;
use wch::potential::Potential;

fn potential(name: &str) -> Result<Potential, String> {
    match name {
        "quartic" => Ok(Potential::Quartic),
        "cosine" => Ok(Potential::cosine()),
        other => Err(format!("unknown potential {other:?} (use quartic or cosine)")),
    }
}

fn check_samples(samples: usize) -> Result<(), String> {
    if (2..=20_000).contains(&samples) {
        Ok(())
    } else {
        Err(format!("samples = {samples} must be in 2..=20000"))
    }
}

/// (y, ω(y)) on [−half_width, half_width].
pub fn layer_points(name: &str, half_width: f64, samples: usize) -> Result<Vec<f64>, String> {
    check_samples(samples)?;
    if !(half_width > 0.0 && half_width <= 25.0) {
        return Err(format!("half width {half_width} must be in (0, 25]"));
    }
    let layer = build_layer(&potential(name)?, 25.0, 1e-2).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * samples);
    for k in 0..samples {
        let y = -half_width + 2.0 * half_width * k as f64 / (samples - 1) as f64;
        out.extend([y, layer.eval(y)[0]]);
    }
    Ok(out)
}

/// (t, γₙ(t)) from RK4 started on the closed form at t0.
pub fn willmore_points(n: usize, t0: f64, t1: f64, samples: usize) -> Result<Vec<f64>, String> {
    check_samples(samples)?;
    let g0 = geometry::gamma_n(n, t0).map_err(|e| e.to_string())?;
    let dt = ((t1 - t0) / 1e4).max(1e-6);
    let curve = geometry::integrate_willmore(n, g0, t0, t1, dt).map_err(|e| e.to_string())?;
    let last = curve.t.len() - 1;
    let mut out = Vec::with_capacity(2 * samples);
    for k in 0..samples {
        let i = (k * last) / (samples - 1);
        out.extend([curve.t[i], curve.gamma[i]]);
    }
    Ok(out)
}

/// (s, fₙ(s)) on [0, s_max].
pub fn kernel_points(n: usize, s_max: f64, samples: usize) -> Result<Vec<f64>, String> {
    check_samples(samples)?;
    if !(s_max > 0.0 && s_max <= 40.0) || !(1..=8).contains(&n) {
        return Err(format!("need 1 ≤ n ≤ 8 and 0 < S ≤ 40 (got n = {n}, S = {s_max})"));
    }
    let mut out = Vec::with_capacity(2 * samples);
    for k in 0..samples {
        let s = s_max * k as f64 / (samples - 1) as f64;
        out.extend([s, kernels::f_n(n, s).map_err(|e| e.to_string())?]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn layer_profile(potential: &str, half_width: f64, samples: usize) -> Result<Vec<f64>, JsValue> {
    layer_points(potential, half_width, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn willmore_radius(n: usize, t0: f64, t1: f64, samples: usize) -> Result<Vec<f64>, JsValue> {
    willmore_points(n, t0, t1, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn kernel_profile(n: usize, s_max: f64, samples: usize) -> Result<Vec<f64>, JsValue> {
    kernel_points(n, s_max, samples).map_err(|e| JsValue::from_str(&e))
}
