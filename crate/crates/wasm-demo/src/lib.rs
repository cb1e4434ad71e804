//! Browser demo: interactive Fisher spheres, perturbed densities and the
//! Ishigami OF-PLI, exposed to a single static page through wasm-bindgen.
//!
//! Each export returns a JSON string (`{"error": "..."}` on failure) so the
//! page needs no generated bindings beyond the function calls, and the
//! payload builders stay plain Rust functions testable on the host.

use wasm_bindgen::prelude::*;

mod panels;

/// Geodesic fan sweeping the Fisher sphere of radius `delta` around
/// N(mu, sigma²), with trajectories for drawing in the (μ/√2, σ) half-plane.
#[wasm_bindgen]
pub fn gaussian_sphere(mu: f64, sigma: f64, delta: f64, k: usize, n_steps: usize) -> String {
    to_json(panels::gaussian_sphere(mu, sigma, delta, k, n_steps))
}

/// Nominal vs perturbed density along one sphere direction of any family.
#[wasm_bindgen]
pub fn perturbed_density(
    spec_json: &str,
    delta: f64,
    angle: f64,
    n_steps: usize,
    n_grid: usize,
) -> String {
    to_json(panels::perturbed_density(spec_json, delta, angle, n_steps, n_grid))
}

/// PLI of the third Ishigami input over a Fisher sphere of radius `delta`
/// (resampling estimator, sample size `n`).
#[wasm_bindgen]
pub fn ishigami_ofpli(delta: f64, k: usize, n: usize, seed: u64) -> String {
    to_json(panels::ishigami_ofpli(delta, k, n, seed))
}

fn to_json(result: Result<serde_json::Value, fisherpli::Error>) -> String {
    match result {
        Ok(value) => value.to_string(),
        Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
    }
}
