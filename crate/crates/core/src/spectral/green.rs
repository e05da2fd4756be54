//! Green function of the Robin Laplacian.
//!
//! The kernel is piecewise bilinear,
//! `K(x,y) = (B + 1 - x)(A + y) / (1 + A + B)` for `y <= x` and symmetric in
//! `(x, y)`, so `(K f)(x)` splits at `y = x` into two smooth integrals that
//! the cumulative quadrature handles without crossing the kink.

use crate::grid::{cumulative, GridFunction};
use crate::params::ReservoirParams;

/// Kernel value; symmetric by construction.
pub fn green_kernel(params: &ReservoirParams, x: f64, y: f64) -> f64 {
    let (a, b) = (params.cap_a, params.cap_b);
    let (lo, hi) = if y <= x { (y, x) } else { (x, y) };
    (b + 1.0 - hi) * (a + lo) / (1.0 + a + b)
}

/// Applies the inverse Robin Laplacian `f -> int K(.,y) f(y) dy` on the grid
/// of `f` in O(M) using prefix integrals of `(A+y) f` and `(B+1-y) f`.
pub fn green_apply(params: &ReservoirParams, f: &GridFunction) -> GridFunction {
    let grid = f.grid;
    let h = grid.h();
    let (a, b) = (params.cap_a, params.cap_b);
    let rising: Vec<f64> = f
        .values
        .iter()
        .zip(grid.nodes())
        .map(|(v, y)| (a + y) * v)
        .collect();
    let falling: Vec<f64> = f
        .values
        .iter()
        .zip(grid.nodes())
        .map(|(v, y)| (b + 1.0 - y) * v)
        .collect();
    let rising_pref = cumulative(&rising, h);
    let falling_pref = cumulative(&falling, h);
    let falling_total = falling_pref[grid.m()];
    let scale = 1.0 / (1.0 + a + b);
    let values = grid
        .nodes()
        .enumerate()
        .map(|(j, x)| {
            let below = (b + 1.0 - x) * rising_pref[j];
            let above = (a + x) * (falling_total - falling_pref[j]);
            scale * (below + above)
        })
        .collect();
    GridFunction::new(grid, values)
}
