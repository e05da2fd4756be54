//! Hydrodynamic-limit convergence: replica-averaged smoothed empirical
//! densities against the PDE solution across lattice scales.
//!
//! Both sides pass through the same smoothing map (bump mollifier at fixed
//! radius, normalizer `U_eps`), so the comparison measures the particle/PDE
//! discrepancy rather than the mollifier's own bias, and the error is taken
//! on the interior window `[eps, 1-eps]` where the smoothing represents the
//! local particle density.

use super::replicas::run_replicas;
use super::reports::Provenance;
use super::{scale_seed, ProfileSpec};
use crate::grid::{Grid, KahanSum};
use crate::model::{
    default_normalizer, empirical_density, sample_profile, smooth_density_field, Simulator,
    TiltField,
};
use crate::params::ReservoirParams;
use crate::pde::{solve_controlled, solve_hydrodynamic, DensityPath, TimeGrid};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub scales: Vec<usize>,
    pub replicas: usize,
    pub horizon: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub grid: Grid,
    pub time_steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleError {
    pub n_scale: usize,
    pub sup_error: f64,
    pub l2_error: f64,
    /// `k_sigma` times the largest standard error of the replica mean over
    /// the comparison window.
    pub conf_radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub scales: Vec<ScaleError>,
    pub checkpoints: Vec<f64>,
    pub replicas: usize,
    pub epsilon: f64,
    pub u_eps: f64,
    pub k_sigma: f64,
    pub provenance: Provenance,
}

impl ConvergenceReport {
    /// Errors decrease across scales up to the confidence radii.
    pub fn monotone_up_to_noise(&self) -> bool {
        self.scales
            .windows(2)
            .all(|w| w[1].sup_error <= w[0].sup_error + w[0].conf_radius + w[1].conf_radius)
    }
}

pub fn hydro_limit_check(
    gamma: &ProfileSpec,
    params: &ReservoirParams,
    config: &ConvergenceConfig,
) -> ConvergenceReport {
    let reference = solve_hydrodynamic(
        &config.grid.sample(|x| gamma.eval(params, x)),
        params,
        TimeGrid::new(config.horizon, config.time_steps),
    )
    .expect("hydrodynamic reference solve");
    run_protocol(gamma, params, config, None, &reference, "zero".into())
}

pub fn tilted_hydro_check(
    gamma: &ProfileSpec,
    params: &ReservoirParams,
    field: &TiltField,
    config: &ConvergenceConfig,
) -> ConvergenceReport {
    let reference = solve_controlled(
        &config.grid.sample(|x| gamma.eval(params, x)),
        params,
        field,
        TimeGrid::new(config.horizon, config.time_steps),
    )
    .expect("controlled reference solve");
    run_protocol(gamma, params, config, Some(field), &reference, field.id())
}

fn run_protocol(
    gamma: &ProfileSpec,
    params: &ReservoirParams,
    config: &ConvergenceConfig,
    field: Option<&TiltField>,
    reference: &DensityPath,
    field_id: String,
) -> ConvergenceReport {
    assert!(
        config.time_steps.is_multiple_of(4),
        "need checkpoints at quarter times"
    );
    assert!(
        config.scales.windows(2).all(|w| w[1] > w[0]),
        "scales must increase"
    );
    let grid = config.grid;
    let u_eps = default_normalizer(config.epsilon);
    let k_sigma = 3.0;
    let checkpoints: Vec<f64> = [0.25, 0.5, 1.0]
        .iter()
        .map(|f| f * config.horizon)
        .collect();
    let checkpoint_indices: Vec<usize> = [1usize, 2, 4]
        .iter()
        .map(|q| q * config.time_steps / 4)
        .collect();

    // smoothed PDE reference restricted to the interior window
    let window: Vec<usize> = grid
        .nodes()
        .enumerate()
        .filter(|(_, x)| *x >= config.epsilon && *x <= 1.0 - config.epsilon)
        .map(|(j, _)| j)
        .collect();
    let smoothed_ref: Vec<Vec<f64>> = checkpoint_indices
        .iter()
        .map(|i| {
            let slice = crate::grid::GridFunction::new(grid, reference.slice(*i).to_vec());
            smooth_density_field(&slice, config.epsilon, u_eps).values
        })
        .collect();

    let mut scales = Vec::with_capacity(config.scales.len());
    for &n in &config.scales {
        let seed = scale_seed(config.seed, n);
        let per_replica: Vec<Vec<f64>> = run_replicas(config.replicas, |r| {
            let initial = sample_profile(
                |x| gamma.eval(params, x),
                n,
                seed ^ 0xA5A5_5A5A_0000_0000 ^ r,
            );
            let mut sim = Simulator::new(initial, params, field, config.horizon, seed, r)
                .expect("valid simulation setup");
            let mut out = Vec::with_capacity(checkpoints.len() * grid.len());
            for t in &checkpoints {
                sim.run_until(*t, |_, _| {});
                let d = empirical_density(&sim.config().empirical_measure(), config.epsilon, u_eps);
                out.extend(grid.nodes().map(|x| d.eval(x)));
            }
            out
        });
        // replica mean and variance per (checkpoint, node), folded in order
        let cols = checkpoints.len() * grid.len();
        let mut sum = vec![KahanSum::default(); cols];
        let mut sumsq = vec![KahanSum::default(); cols];
        for row in &per_replica {
            for (c, v) in row.iter().enumerate() {
                sum[c].add(*v);
                sumsq[c].add(v * v);
            }
        }
        let rn = config.replicas as f64;
        let mut sup_error = 0.0_f64;
        let mut l2_acc = 0.0_f64;
        let mut worst_se = 0.0_f64;
        let mut window_points = 0usize;
        for (ci, _) in checkpoints.iter().enumerate() {
            for &j in &window {
                let c = ci * grid.len() + j;
                let mean = sum[c].value() / rn;
                let var = (sumsq[c].value() / rn - mean * mean).max(0.0) * rn / (rn - 1.0);
                let se = (var / rn).sqrt();
                let err = (mean - smoothed_ref[ci][j]).abs();
                sup_error = sup_error.max(err);
                l2_acc += err * err;
                worst_se = worst_se.max(se);
                window_points += 1;
            }
        }
        let l2_error = (l2_acc * (1.0 - 2.0 * config.epsilon) / window_points as f64).sqrt();
        scales.push(ScaleError {
            n_scale: n,
            sup_error,
            l2_error,
            conf_radius: k_sigma * worst_se,
        });
    }

    ConvergenceReport {
        scales,
        checkpoints,
        replicas: config.replicas,
        epsilon: config.epsilon,
        u_eps,
        k_sigma,
        provenance: Provenance::new(
            params,
            config.seed,
            config.horizon,
            grid.m(),
            config.time_steps,
            field_id,
            gamma.id(),
        ),
    }
}
