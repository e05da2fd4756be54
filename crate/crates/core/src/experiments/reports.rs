//! Provenance manifests embedded in every experiment report.

use crate::params::ReservoirParams;
use serde::{Deserialize, Serialize};

/// Everything needed to reproduce a report bit-for-bit: seeds, grids,
/// parameters and the field/profile identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub params: ReservoirParams,
    pub seed: u64,
    pub horizon: f64,
    pub space_cells: usize,
    pub time_steps: usize,
    pub field_id: String,
    pub profile_id: String,
    pub crate_version: String,
}

impl Provenance {
    pub fn new(
        params: &ReservoirParams,
        seed: u64,
        horizon: f64,
        space_cells: usize,
        time_steps: usize,
        field_id: String,
        profile_id: String,
    ) -> Self {
        Self {
            params: *params,
            seed,
            horizon,
            space_cells,
            time_steps,
            field_id,
            profile_id,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}
