//! Microscopic layer: configurations, jump rates for the symmetric and
//! weakly asymmetric dynamics, exact event-driven simulation, empirical
//! measures and Girsanov path weights.

mod config;
mod field;
mod mollify;
mod rates;
mod simulate;

pub use config::{sample_profile, EmpiricalMeasure, LatticeConfiguration, PackedBits};
pub use field::{FieldBoundsViolation, FieldKind, TiltField};
pub use mollify::{
    bump_kernel, bump_normalizer, default_normalizer, empirical_density, smooth_density_field,
    SmoothedDensity,
};
pub use rates::{ssep_rates, wasep_rates, EventKind, RateTable};
pub use simulate::{
    girsanov_log_weight, girsanov_log_weight_window, simulate, JumpEvent, JumpPath, Simulator,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("tilt field metadata invalid: declared sup {quantity} {declared} exceeded at (t,x) = ({:.4}, {:.4}) with {observed}", at.0, at.1)]
    FieldBounds {
        quantity: &'static str,
        at: (f64, f64),
        observed: f64,
        declared: f64,
    },
    #[error("path horizon {path} extends beyond the field's tabulated horizon {field}")]
    HorizonMismatch { path: f64, field: f64 },
}

impl From<FieldBoundsViolation> for ModelError {
    fn from(v: FieldBoundsViolation) -> Self {
        ModelError::FieldBounds {
            quantity: v.quantity,
            at: v.at,
            observed: v.observed,
            declared: v.declared,
        }
    }
}
