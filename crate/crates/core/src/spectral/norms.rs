//! Reservoir inner product and the first-order Sobolev quadratic form.

use crate::grid::{simpson, GridFunction};
use crate::params::ReservoirParams;

/// Quadratic form of the reservoir space: `f(0)^2/A + int (grad f)^2 +
/// f(1)^2/B`, with the gradient taken by finite differences on the grid.
/// On an eigenfunction this evaluates to its eigenvalue.
pub fn hr_norm_sq(params: &ReservoirParams, f: &GridFunction) -> f64 {
    let grad = f.gradient();
    let sq: Vec<f64> = grad.values.iter().map(|g| g * g).collect();
    let bulk = simpson(&sq, f.grid.h());
    let n = f.values.len();
    f.values[0] * f.values[0] / params.cap_a
        + bulk
        + f.values[n - 1] * f.values[n - 1] / params.cap_b
}

/// Standard first-order Sobolev quadratic form `||f||_2^2 + ||grad f||_2^2`.
pub fn h1_norm_sq(f: &GridFunction) -> f64 {
    let grad = f.gradient();
    let gsq: Vec<f64> = grad.values.iter().map(|g| g * g).collect();
    let fsq: Vec<f64> = f.values.iter().map(|v| v * v).collect();
    simpson(&fsq, f.grid.h()) + simpson(&gsq, f.grid.h())
}
