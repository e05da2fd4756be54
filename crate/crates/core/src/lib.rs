//! Simulator and numerical-analysis toolkit for the one-dimensional symmetric
//! exclusion process in weak contact with boundary reservoirs.
//!
//! The crate has four layers:
//!
//! * [`model`] — the microscopic particle system: configurations, jump rates
//!   for the symmetric and weakly asymmetric dynamics, exact event-driven
//!   simulation, empirical measures and Girsanov path weights.
//! * [`spectral`] — the Robin-Laplacian toolkit: eigenvalues, eigenfunctions,
//!   Green function, heat semigroups and the associated norms.
//! * [`pde`] — macroscopic solvers for the heat equation with Robin boundary
//!   conditions, its homogeneous variant, and the controlled (tilted)
//!   equation, plus stationary-profile and free-energy diagnostics.
//! * [`rate`] — the dynamical large-deviations rate functional, evaluated by
//!   three independent routes (variational, closed-form elliptic recovery,
//!   bulk/boundary decomposition) that must agree.
//!
//! [`experiments`] ties the layers together with replica-based verification
//! harnesses, and [`io`] provides deterministic CSV/manifest serialization.

pub mod experiments;
pub mod grid;
pub mod io;
pub mod model;
pub mod params;
pub mod pde;
pub mod rate;
pub mod spectral;

/// Mobility of the exclusion process, `sigma(u) = u(1-u)`.
#[inline]
pub fn mobility(u: f64) -> f64 {
    u * (1.0 - u)
}

/// Log-odds `log(u/(1-u))`; finite only for u in (0,1).
#[inline]
pub fn logit(u: f64) -> f64 {
    (u / (1.0 - u)).ln()
}
