//! The entropy identity: the replica mean of `N^{-1} log dP^H/dP` under the
//! tilted dynamics converges to the rate of the controlled hydrodynamic
//! profile.

use super::replicas::run_replicas;
use super::reports::Provenance;
use super::{scale_seed, ProfileSpec};
use crate::grid::{Grid, KahanSum};
use crate::model::{sample_profile, Simulator, TiltField};
use crate::params::ReservoirParams;
use crate::pde::{solve_controlled, TimeGrid};
use crate::rate::rate_direct;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct EntropyConfig {
    pub n_scale: usize,
    pub replicas: usize,
    pub horizon: f64,
    pub seed: u64,
    pub grid: Grid,
    pub time_steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyReport {
    pub n_scale: usize,
    pub replicas: usize,
    /// Replica mean of `log weight / N` under the tilted law.
    pub mean_normalized_weight: f64,
    pub standard_error: f64,
    /// `I_[0,T](u^H | gamma)` from the direct evaluation.
    pub rate_value: f64,
    pub relative_gap: f64,
    pub provenance: Provenance,
}

pub fn entropy_identity_check(
    gamma: &ProfileSpec,
    params: &ReservoirParams,
    field: &TiltField,
    config: &EntropyConfig,
) -> EntropyReport {
    let u_h = solve_controlled(
        &config.grid.sample(|x| gamma.eval(params, x)),
        params,
        field,
        TimeGrid::new(config.horizon, config.time_steps),
    )
    .expect("controlled solve");
    let (breakdown, _) = rate_direct(&u_h, params).expect("rate evaluation");
    let rate_value = breakdown.i_total;

    let n = config.n_scale;
    let seed = scale_seed(config.seed, n);
    let weights: Vec<f64> = run_replicas(config.replicas, |r| {
        let initial = sample_profile(
            |x| gamma.eval(params, x),
            n,
            seed ^ 0xA5A5_5A5A_0000_0000 ^ r,
        );
        let sim = Simulator::new(initial, params, Some(field), config.horizon, seed, r)
            .expect("valid simulation setup");
        let (_, w) = sim.finish(|_, _| {});
        w / n as f64
    });
    let mut sum = KahanSum::default();
    let mut sumsq = KahanSum::default();
    for w in &weights {
        sum.add(*w);
        sumsq.add(w * w);
    }
    let rn = config.replicas as f64;
    let mean = sum.value() / rn;
    let var = (sumsq.value() / rn - mean * mean).max(0.0) * rn / (rn - 1.0);
    let standard_error = (var / rn).sqrt();
    let relative_gap = if rate_value.abs() > 0.0 {
        (mean - rate_value).abs() / rate_value.abs()
    } else {
        (mean - rate_value).abs()
    };
    EntropyReport {
        n_scale: n,
        replicas: config.replicas,
        mean_normalized_weight: mean,
        standard_error,
        rate_value,
        relative_gap,
        provenance: Provenance::new(
            params,
            config.seed,
            config.horizon,
            config.grid.m(),
            config.time_steps,
            field.id(),
            gamma.id(),
        ),
    }
}
