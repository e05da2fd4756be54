//! Reservoir parameters shared by every layer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The four boundary constants governing the reservoir coupling: densities
/// `alpha`, `beta` and coupling strengths `cap_a`, `cap_b` (the weak-contact
/// scale factors at the left and right boundary).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    pub alpha: f64,
    pub beta: f64,
    pub cap_a: f64,
    pub cap_b: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error(
        "reservoir densities must satisfy 0 < alpha <= beta < 1 (alpha = {alpha}, beta = {beta})"
    )]
    DensityOrder { alpha: f64, beta: f64 },
    #[error("coupling strength {name} must be positive and finite (got {value})")]
    Coupling { name: &'static str, value: f64 },
}

impl ReservoirParams {
    pub fn new(alpha: f64, beta: f64, cap_a: f64, cap_b: f64) -> Result<Self, ParamsError> {
        if !(alpha > 0.0 && alpha <= beta && beta < 1.0) {
            return Err(ParamsError::DensityOrder { alpha, beta });
        }
        if !(cap_a > 0.0 && cap_a.is_finite()) {
            return Err(ParamsError::Coupling {
                name: "cap_a",
                value: cap_a,
            });
        }
        if !(cap_b > 0.0 && cap_b.is_finite()) {
            return Err(ParamsError::Coupling {
                name: "cap_b",
                value: cap_b,
            });
        }
        Ok(Self {
            alpha,
            beta,
            cap_a,
            cap_b,
        })
    }

    /// Equal reservoirs with unit coupling; the standard test fixture.
    pub fn symmetric(rho: f64) -> Self {
        Self::new(rho, rho, 1.0, 1.0).expect("valid density")
    }
}
