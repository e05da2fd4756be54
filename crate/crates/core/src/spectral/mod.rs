//! Robin-Laplacian toolkit: eigenvalues of the transcendental boundary
//! problem, eigenfunctions, Green function, heat semigroups for the four
//! boundary families (Robin, mixed, Dirichlet, Neumann), and the reservoir
//! inner product.

mod basis;
mod green;
mod norms;
mod semigroup;

pub use basis::{solve_eigenvalues, SpectralBasis};
pub use green::{green_apply, green_kernel};
pub use norms::{h1_norm_sq, hr_norm_sq};
pub use semigroup::{BoundaryFlavor, SemigroupOutput};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("failed to bracket eigenvalue {index}: sign of the secular function does not change on ({lo}, {hi})")]
    BracketFailure { index: usize, lo: f64, hi: f64 },
    #[error("eigenfunction index {index} out of range 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("truncation K = {truncation} too small at t = {t}: estimated tail mass {tail:.3e} exceeds {tol:.3e}")]
    TruncationInsufficient {
        truncation: usize,
        t: f64,
        tail: f64,
        tol: f64,
    },
}
