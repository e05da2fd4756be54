//! Exploratory importance-sampling probe of the large-deviations shadow:
//! the probability that the empirical trajectory tracks the controlled
//! profile, estimated with tilted proposals and Girsanov weights. Output is
//! indicative only; no tolerance is asserted against the rate value.

use super::replicas::run_replicas;
use super::reports::Provenance;
use super::{scale_seed, ProfileSpec};
use crate::grid::{Grid, KahanSum};
use crate::model::{default_normalizer, empirical_density, sample_profile, Simulator, TiltField};
use crate::params::ReservoirParams;
use crate::pde::{solve_controlled, TimeGrid};
use crate::rate::rate_direct;
use serde::{Deserialize, Serialize};

const CHECKPOINTS: usize = 8;

#[derive(Debug, Clone)]
pub struct RareEventConfig {
    pub n_scale: usize,
    pub replicas: usize,
    pub horizon: f64,
    pub ball_radius: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub grid: Grid,
    pub time_steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RareEventReport {
    pub n_scale: usize,
    pub replicas: usize,
    pub ball_radius: f64,
    pub hits: usize,
    pub probability_estimate: f64,
    /// `-(1/N) log` of the estimate; indicative comparison column.
    pub neg_log_over_n: f64,
    pub rate_value: f64,
    /// Effective sample size over the hit set.
    pub effective_sample_size: f64,
    pub degenerate: bool,
    pub provenance: Provenance,
}

/// Estimates `P[pi^N stays within `ball_radius` of the controlled profile in
/// time-averaged L1 over 8 checkpoints]` under the symmetric dynamics, using
/// `proposal` as the importance-sampling tilt (pass the target field for the
/// matched proposal, the zero field for vanilla sampling).
pub fn rare_event_probe(
    gamma: &ProfileSpec,
    params: &ReservoirParams,
    target_field: &TiltField,
    proposal: &TiltField,
    config: &RareEventConfig,
) -> RareEventReport {
    assert!(config.n_scale <= 64, "probe is meant for small scales");
    assert!(config.time_steps.is_multiple_of(CHECKPOINTS));
    let grid = config.grid;
    let u_eps = default_normalizer(config.epsilon);
    let target = solve_controlled(
        &grid.sample(|x| gamma.eval(params, x)),
        params,
        target_field,
        TimeGrid::new(config.horizon, config.time_steps),
    )
    .expect("controlled solve");
    let (breakdown, _) = rate_direct(&target, params).expect("rate evaluation");

    let checkpoint_times: Vec<f64> = (1..=CHECKPOINTS)
        .map(|k| config.horizon * k as f64 / CHECKPOINTS as f64)
        .collect();
    let checkpoint_indices: Vec<usize> = (1..=CHECKPOINTS)
        .map(|k| k * config.time_steps / CHECKPOINTS)
        .collect();
    let window: Vec<(usize, f64)> = grid
        .nodes()
        .enumerate()
        .filter(|(_, x)| *x >= config.epsilon && *x <= 1.0 - config.epsilon)
        .collect();
    // smoothed target rows at the checkpoints
    let target_rows: Vec<Vec<f64>> = checkpoint_indices
        .iter()
        .map(|i| {
            let slice = crate::grid::GridFunction::new(grid, target.slice(*i).to_vec());
            crate::model::smooth_density_field(&slice, config.epsilon, u_eps).values
        })
        .collect();

    let n = config.n_scale;
    let seed = scale_seed(config.seed, n);
    // (hit, importance weight dP/dP^H = exp(-log_weight))
    let outcomes: Vec<(bool, f64)> = run_replicas(config.replicas, |r| {
        let initial = sample_profile(
            |x| gamma.eval(params, x),
            n,
            seed ^ 0xA5A5_5A5A_0000_0000 ^ r,
        );
        let mut sim = Simulator::new(initial, params, Some(proposal), config.horizon, seed, r)
            .expect("valid simulation setup");
        let mut distance = 0.0;
        for (k, t) in checkpoint_times.iter().enumerate() {
            sim.run_until(*t, |_, _| {});
            let d = empirical_density(&sim.config().empirical_measure(), config.epsilon, u_eps);
            let mut l1 = 0.0;
            for (j, x) in &window {
                l1 += (d.eval(*x) - target_rows[k][*j]).abs();
            }
            distance += l1 * grid.h() / CHECKPOINTS as f64;
        }
        (distance <= config.ball_radius, (-sim.log_weight()).exp())
    });

    let mut est = KahanSum::default();
    let mut hit_w = KahanSum::default();
    let mut hit_w2 = KahanSum::default();
    let mut hits = 0usize;
    for (hit, w) in &outcomes {
        if *hit {
            est.add(*w);
            hit_w.add(*w);
            hit_w2.add(w * w);
            hits += 1;
        }
    }
    let probability_estimate = est.value() / config.replicas as f64;
    let effective_sample_size = if hit_w2.value() > 0.0 {
        hit_w.value() * hit_w.value() / hit_w2.value()
    } else {
        0.0
    };
    let neg_log_over_n = if probability_estimate > 0.0 {
        -probability_estimate.ln() / n as f64
    } else {
        f64::INFINITY
    };
    RareEventReport {
        n_scale: n,
        replicas: config.replicas,
        ball_radius: config.ball_radius,
        hits,
        probability_estimate,
        neg_log_over_n,
        rate_value: breakdown.i_total,
        effective_sample_size,
        degenerate: effective_sample_size < 10.0,
        provenance: Provenance::new(
            params,
            config.seed,
            config.horizon,
            grid.m(),
            config.time_steps,
            format!("target={} proposal={}", target_field.id(), proposal.id()),
            gamma.id(),
        ),
    }
}
