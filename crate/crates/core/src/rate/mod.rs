//! Large-deviations layer: the boundary-cost algebra, the tilted functional
//! `J_{T,H}`, and three independent evaluations of the dynamical rate
//! functional — variational ascent over a field basis, closed-form recovery
//! through the elliptic flux reduction, and the bulk/boundary decomposition.

mod algebra;
mod boundary;
mod decomposed;
mod direct;
mod energy;
mod functional;
mod variational;

pub use algebra::{path_cost_algebra_check, PathCostReport};
pub use boundary::{boundary_b, boundary_c, boundary_p, boundary_p_da, boundary_p_dm, boundary_q};
pub use decomposed::{
    legendre_plain, legendre_shifted, rate_decomposed, BoundaryDecomposition, Decomposed,
};
pub use direct::{rate_direct, RateBreakdown, RecoveredField};
pub use energy::{energy, EnergyPair};
pub use functional::{functional_j, JEvaluation, ENERGY_CLASS_THRESHOLD};
pub use variational::{rate_variational, AscentTrace, FieldBasis, VariationalResult};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("boundary Newton diverged at slice {slice} (residual {residual:.3e})")]
    NewtonDiverged { slice: usize, residual: f64 },
    #[error("Legendre Newton failed at slice {slice} (gradient norm {gradient_norm:.3e})")]
    LegendreFailed { slice: usize, gradient_norm: f64 },
    #[error("ascent decreased at iteration {iteration} ({from} -> {to}); step-size pathology")]
    NonMonotoneAscent {
        iteration: usize,
        from: f64,
        to: f64,
    },
    #[error("path leaves (0,1) on the evaluation window (min {min:.3e}, max {max:.3e}); rate recovery needs interior densities")]
    DegeneratePath { min: f64, max: f64 },
}
