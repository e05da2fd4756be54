//! Cross-layer verification harnesses: hydrodynamic-limit convergence,
//! tilted hydrodynamics, the Girsanov entropy identity, and the exploratory
//! rare-event probe. Replicas run with independent RNG streams and are
//! aggregated in replica order with compensated sums, so every report is
//! reproducible bit-for-bit from its embedded provenance.

mod entropy;
mod hydro_limit;
mod rare_event;
mod replicas;
mod reports;

pub use entropy::{entropy_identity_check, EntropyConfig, EntropyReport};
pub use hydro_limit::{
    hydro_limit_check, tilted_hydro_check, ConvergenceConfig, ConvergenceReport, ScaleError,
};
pub use rare_event::{rare_event_probe, RareEventConfig, RareEventReport};
pub use replicas::{run_replicas, run_replicas_sequential};
pub use reports::Provenance;

use crate::params::ReservoirParams;
use crate::pde::stationary_profile;
use serde::{Deserialize, Serialize};

/// Initial density profiles used across experiments and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProfileSpec {
    Stationary,
    Constant {
        value: f64,
    },
    Step {
        threshold: f64,
        left: f64,
        right: f64,
    },
}

impl ProfileSpec {
    pub fn eval(&self, params: &ReservoirParams, x: f64) -> f64 {
        match self {
            ProfileSpec::Stationary => stationary_profile(params).value(x),
            ProfileSpec::Constant { value } => *value,
            ProfileSpec::Step {
                threshold,
                left,
                right,
            } => {
                if x < *threshold {
                    *left
                } else {
                    *right
                }
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            ProfileSpec::Stationary => "stationary".into(),
            ProfileSpec::Constant { value } => format!("constant({value})"),
            ProfileSpec::Step {
                threshold,
                left,
                right,
            } => {
                format!("step(at={threshold},left={left},right={right})")
            }
        }
    }
}

/// Deterministic per-scale seed mixing; the replica index then selects the
/// RNG stream within the family.
pub(crate) fn scale_seed(base: u64, n_scale: usize) -> u64 {
    base ^ (n_scale as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}
