//! Calibration pre-run for the statistical verification harnesses.

use std::time::Instant;

use robin_sep_core::experiments::{
    entropy_identity_check, hydro_limit_check, tilted_hydro_check, ConvergenceConfig,
    EntropyConfig, ProfileSpec,
};
use robin_sep_core::grid::Grid;
use robin_sep_core::model::TiltField;
use robin_sep_core::params::ReservoirParams;

fn main() {
    let p = ReservoirParams::new(0.2, 0.8, 1.0, 1.0).unwrap();
    let field = TiltField::sine(0.4, 1, 0.1);
    let step = ProfileSpec::Step {
        threshold: 0.5,
        left: 1.0,
        right: 0.0,
    };

    let t0 = Instant::now();
    let config = ConvergenceConfig {
        scales: vec![64, 128, 256],
        replicas: 200,
        horizon: 0.1,
        epsilon: 0.05,
        seed: 20260809,
        grid: Grid::new(512),
        time_steps: 1024,
    };
    let hydro = hydro_limit_check(&step, &p, &config);
    println!("hydro-limit ({:?}):", t0.elapsed());
    for s in &hydro.scales {
        println!(
            "  N={:4}  sup={:.5}  l2={:.5}  radius={:.5}",
            s.n_scale, s.sup_error, s.l2_error, s.conf_radius
        );
    }
    println!("  monotone: {}", hydro.monotone_up_to_noise());

    let t0 = Instant::now();
    let config_tilted = ConvergenceConfig {
        horizon: 0.2,
        time_steps: 2048,
        ..config.clone()
    };
    let tilted = tilted_hydro_check(&step, &p, &field, &config_tilted);
    println!("tilted-hydro ({:?}):", t0.elapsed());
    for s in &tilted.scales {
        println!(
            "  N={:4}  sup={:.5}  l2={:.5}  radius={:.5}",
            s.n_scale, s.sup_error, s.l2_error, s.conf_radius
        );
    }
    println!("  monotone: {}", tilted.monotone_up_to_noise());

    for n in [128usize, 256] {
        let t0 = Instant::now();
        let config = EntropyConfig {
            n_scale: n,
            replicas: 400,
            horizon: 0.2,
            seed: 20260809,
            grid: Grid::new(512),
            time_steps: 2048,
        };
        let e = entropy_identity_check(&ProfileSpec::Stationary, &p, &field, &config);
        println!(
            "entropy N={} ({:?}): mean={:.6} +- {:.6}  I={:.6}  gap={:.3}%",
            n,
            t0.elapsed(),
            e.mean_normalized_weight,
            e.standard_error,
            e.rate_value,
            100.0 * e.relative_gap
        );
    }
}
