//! Macroscopic layer: weak-solution solvers for the hydrodynamic equation,
//! the homogeneous Robin problem and the controlled (tilted) equation, the
//! stationary profile, and maximum-principle / free-energy diagnostics.

mod controlled;
mod free_energy;
mod path;
mod solver;

pub use controlled::solve_controlled;
pub use free_energy::{free_energy_diagnostic, FreeEnergyLedger};
pub use path::DensityPath;
pub use solver::{solve_hydrodynamic, solve_robin_homogeneous, HomogeneousMethod, TimeGrid};

use crate::grid::Grid;
use crate::params::ReservoirParams;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("tridiagonal solve broke down at step {step} (pivot {pivot:.3e})")]
    LinearSolve { step: usize, pivot: f64 },
    #[error("boundary Newton failed to converge at step {step} (residual {residual:.3e})")]
    BoundaryNewton { step: usize, residual: f64 },
    #[error(
        "explicit drift destabilized the controlled solve even after {retries} halvings of dt"
    )]
    CflExceeded { retries: usize },
    #[error("density touches {{0,1}} inside the diagnostic window (min {min:.3e}, max {max:.3e})")]
    DegenerateDensity { min: f64, max: f64 },
}

/// Closed-form stationary profile of the hydrodynamic equation: the affine
/// interpolation between alpha at x = -A and beta at x = 1 + B.
#[derive(Debug, Clone, Copy)]
pub struct StationaryProfile {
    pub intercept: f64,
    pub slope: f64,
}

impl StationaryProfile {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    pub fn sample(&self, grid: Grid) -> Vec<f64> {
        grid.nodes().map(|x| self.value(x)).collect()
    }
}

/// The unique stationary solution of the hydrodynamic equation.
pub fn stationary_profile(params: &ReservoirParams) -> StationaryProfile {
    let denom = 1.0 + params.cap_a + params.cap_b;
    StationaryProfile {
        intercept: (params.alpha * (1.0 + params.cap_b) + params.beta * params.cap_a) / denom,
        slope: (params.beta - params.alpha) / denom,
    }
}
