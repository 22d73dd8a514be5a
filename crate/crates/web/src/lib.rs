//! WebAssembly bindings for a static demo page: kernel profiles, Franke
//! fits on dyadic grids and componentwise P-greedy runs.
//!
//! The plain Rust functions in [`ops`] do the work; the exported wrappers
//! only convert errors into JavaScript exceptions.

pub mod ops;

use wasm_bindgen::prelude::*;

pub use ops::{FitResult, GreedyResult};

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// Values of `K(0, r e_1)` at `n` equispaced `r` in `[-radius, radius]`.
#[wasm_bindgen(js_name = kernelProfile)]
pub fn kernel_profile(spec: &str, radius: f64, n: usize) -> Result<Vec<f64>, JsError> {
    ops::kernel_profile(spec, radius, n).map_err(js)
}

/// Product kernel fit of Franke's function on `X_i x X_j`, sampled on a
/// `res x res` grid of `[0, 1]^2`.
#[wasm_bindgen(js_name = gridFit)]
pub fn grid_fit(k1: &str, k2: &str, i: u32, j: u32, res: usize) -> Result<FitResult, JsError> {
    ops::grid_fit(k1, k2, i, j, res).map_err(js)
}

/// Componentwise P-greedy on Franke's function over `candidates x
/// candidates` uniform candidates, stopped after `max_points` grid points.
#[wasm_bindgen(js_name = pgreedy)]
pub fn pgreedy(k1: &str, k2: &str, candidates: usize, max_points: usize, res: usize) -> Result<GreedyResult, JsError> {
    ops::pgreedy(k1, k2, candidates, max_points, res).map_err(js)
}
