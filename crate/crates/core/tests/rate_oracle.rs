//! Forward-inverse oracle loop: solve the controlled equation with a known
//! field, then check that all three rate evaluations agree with each other
//! and with the tilted functional at the generating field.

use robin_sep_core::grid::Grid;
use robin_sep_core::model::TiltField;
use robin_sep_core::params::ReservoirParams;
use robin_sep_core::pde::{solve_controlled, solve_hydrodynamic, stationary_profile, TimeGrid};
use robin_sep_core::rate::{
    functional_j, rate_decomposed, rate_direct, rate_variational, FieldBasis,
};

fn fixture() -> (ReservoirParams, TiltField) {
    (
        ReservoirParams::new(0.2, 0.8, 1.0, 1.0).unwrap(),
        TiltField::sine(0.4, 1, 0.1),
    )
}

#[test]
fn controlled_path_oracle_loop_moderate_resolution() {
    let (p, field) = fixture();
    let grid = Grid::new(256);
    let rho = stationary_profile(&p);
    let gamma = grid.sample(|x| rho.value(x));
    let time = TimeGrid::new(0.2, 1024);
    let u = solve_controlled(&gamma, &p, &field, time).unwrap();

    // mass balance: d/dt of the trapezoid mass telescopes to the boundary flux
    let (b, recovered) = rate_direct(&u, &p).unwrap();
    assert!(b.i_total > 0.0);

    // the recovered field matches the generating one
    let mut sup_grad_err = 0.0_f64;
    let mut sup_bdry = 0.0_f64;
    for (i, t) in u.times.iter().enumerate() {
        for (j, x) in grid.nodes().enumerate() {
            let err = (recovered.gradient(i, j) - field.gradient(*t, x)).abs();
            sup_grad_err = sup_grad_err.max(err);
        }
        sup_bdry = sup_bdry.max(recovered.value(i, 0).abs());
        sup_bdry = sup_bdry.max(recovered.value(i, grid.m()).abs());
    }
    // the sup sits at the ramp kink and the startup slices, where the
    // centered time stencil loses an order; it contracts with dt
    assert!(
        sup_grad_err < 2e-3,
        "sup gradient recovery error {sup_grad_err}"
    );
    assert!(
        sup_bdry < 1e-3,
        "recovered boundary values should vanish: {sup_bdry}"
    );

    // J at the generating field attains the rate
    let j = functional_j(&u, &field, &p);
    assert!(
        (j.value - b.i_total).abs() < 1e-3,
        "J = {} vs I = {}",
        j.value,
        b.i_total
    );

    // decomposition sums to the same value
    let d = rate_decomposed(&u, &p).unwrap();
    assert!(
        (d.breakdown.i_total - b.i_total).abs() < 1e-3,
        "I1+I2 = {} vs I = {}",
        d.breakdown.i_total,
        b.i_total
    );

    // variational ascent climbs to the same value as the basis grows
    let mut prev = f64::NEG_INFINITY;
    let mut fin = 0.0;
    for modes in [2, 6, 12] {
        let basis = FieldBasis::uniform(&u, 33, modes);
        let r = rate_variational(&u, &p, &basis).unwrap();
        assert!(r.value >= prev - 1e-9, "not monotone in basis size");
        prev = r.value;
        fin = r.value;
    }
    assert!(
        (fin - b.i_total).abs() < 2e-3,
        "variational {} vs direct {}",
        fin,
        b.i_total
    );
}

#[test]
fn hydrodynamic_reduction_of_the_controlled_solver() {
    let (p, _) = fixture();
    let grid = Grid::new(256);
    let gamma = grid.sample(|x| 0.4 + 0.1 * (std::f64::consts::PI * x).cos());
    let time = TimeGrid::new(0.1, 512);
    let tilted = solve_controlled(&gamma, &p, &TiltField::zero(), time).unwrap();
    let plain = solve_hydrodynamic(&gamma, &p, time).unwrap();
    let mut sup = 0.0_f64;
    for (a, b) in tilted.values_flat().iter().zip(plain.values_flat()) {
        sup = sup.max((a - b).abs());
    }
    assert!(
        sup < 1e-10,
        "controlled with zero field differs from hydrodynamic by {sup}"
    );
}

#[test]
fn controlled_solutions_obey_gronwall_stability() {
    // two initial profiles under the same field: the L2 distance grows at
    // most like e^{C t} with a modest constant (here C = 5 comfortably
    // dominates the fitted growth; diffusion actually contracts most of it)
    let (p, field) = fixture();
    let grid = Grid::new(128);
    let g1 = grid.sample(|x| 0.45 + 0.1 * (std::f64::consts::PI * x).sin());
    let g2 = grid.sample(|x| 0.45 + 0.1 * (std::f64::consts::PI * x).sin() + 0.02 * (3.0 * x).cos());
    let time = TimeGrid::new(0.2, 256);
    let u1 = solve_controlled(&g1, &p, &field, time).unwrap();
    let u2 = solve_controlled(&g2, &p, &field, time).unwrap();
    let l2 = |i: usize| {
        let sq: Vec<f64> = u1
            .slice(i)
            .iter()
            .zip(u2.slice(i))
            .map(|(a, b)| (a - b) * (a - b))
            .collect();
        robin_sep_core::grid::simpson(&sq, grid.h()).sqrt()
    };
    let d0 = l2(0);
    assert!(d0 > 0.0);
    let c_bound = 5.0;
    for i in (0..=u1.steps()).step_by(32) {
        let ratio = l2(i) / d0;
        let allowed = (c_bound * u1.times[i]).exp();
        assert!(ratio <= allowed, "t = {}: ratio {ratio} > {allowed}", u1.times[i]);
    }
}

#[test]
fn controlled_solver_survives_a_stiff_drift_by_refining() {
    // a strong affine tilt at a coarse step count violates the explicit
    // drift's stability limit; the solver halves dt internally and still
    // returns values in [0, 1] on the requested grid
    let p = ReservoirParams::new(0.2, 0.8, 1.0, 1.0).unwrap();
    let grid = Grid::new(64);
    let gamma = grid.sample(|_| 0.5);
    let strong = TiltField::affine(30.0);
    let u = solve_controlled(&gamma, &p, &strong, TimeGrid::new(0.1, 16)).unwrap();
    let (lo, hi) = u.bounds();
    assert!(lo >= -1e-9 && hi <= 1.0 + 1e-9, "bounds ({lo}, {hi})");
    assert_eq!(u.steps(), 16, "output stays on the requested time grid");
}
