//! The energy functional and its strong (mobility-weighted) variant.

use crate::grid::{simpson, trapezoid_nonuniform};
use crate::mobility;
use crate::pde::DensityPath;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPair {
    /// `Q = 1/2 int_0^T int (grad u)^2 dx dt`
    pub q_value: f64,
    /// `int_0^T int (grad u)^2 / sigma(u) dx dt`, with the diagnostic clamp
    /// keeping the division finite at the extremes.
    pub strong_energy: f64,
}

pub fn energy(u: &DensityPath) -> EnergyPair {
    let h = u.grid.h();
    let mut q_t = Vec::with_capacity(u.steps() + 1);
    let mut s_t = Vec::with_capacity(u.steps() + 1);
    for i in 0..=u.steps() {
        let du = u.space_gradient(i);
        let sq: Vec<f64> = du.iter().map(|d| d * d).collect();
        q_t.push(simpson(&sq, h));
        let strong: Vec<f64> = du
            .iter()
            .zip(u.slice(i))
            .map(|(d, v)| d * d / mobility(v.clamp(1e-12, 1.0 - 1e-12)))
            .collect();
        s_t.push(simpson(&strong, h));
    }
    EnergyPair {
        q_value: 0.5 * trapezoid_nonuniform(&u.times, &q_t),
        strong_energy: trapezoid_nonuniform(&u.times, &s_t),
    }
}
