//! Cross-solver and convergence checks for the macroscopic layer.

use robin_sep_core::grid::Grid;
use robin_sep_core::params::ReservoirParams;
use robin_sep_core::pde::{
    solve_hydrodynamic, solve_robin_homogeneous, stationary_profile, HomogeneousMethod, TimeGrid,
};
use robin_sep_core::spectral::solve_eigenvalues;

fn params() -> ReservoirParams {
    ReservoirParams::new(0.2, 0.8, 1.0, 1.0).unwrap()
}

#[test]
fn stationary_profile_is_a_fixed_point_to_machine_precision() {
    let p = params();
    let grid = Grid::new(512);
    let rho = stationary_profile(&p);
    let gamma = grid.sample(|x| rho.value(x));
    let u = solve_hydrodynamic(&gamma, &p, TimeGrid::new(1.0, 256)).unwrap();
    let mut sup = 0.0_f64;
    for i in 0..=u.steps() {
        for (j, x) in grid.nodes().enumerate() {
            sup = sup.max((u.value(i, j) - rho.value(x)).abs());
        }
    }
    assert!(sup < 1e-10, "drift off the stationary profile: {sup}");
}

#[test]
fn finite_difference_and_spectral_routes_agree() {
    let p = params();
    let grid = Grid::new(512);
    let basis = solve_eigenvalues(&p, 128).unwrap();
    let phi = grid.sample(|x| 0.3 + 0.4 * x * x + 0.1 * (2.0 * std::f64::consts::PI * x).cos());
    let time = TimeGrid::new(0.1, 512);
    let fd = solve_robin_homogeneous(&phi, &p, time, HomogeneousMethod::FiniteDifference).unwrap();
    let sp = solve_robin_homogeneous(&phi, &p, time, HomogeneousMethod::Spectral(&basis)).unwrap();
    // L2 distance at the final time
    let h = grid.h();
    let sq: Vec<f64> = fd
        .slice(fd.steps())
        .iter()
        .zip(sp.slice(sp.steps()))
        .map(|(a, b)| (a - b) * (a - b))
        .collect();
    let l2 = robin_sep_core::grid::simpson(&sq, h).sqrt();
    assert!(l2 < 1e-4, "fd vs spectral L2 distance {l2}");
}

#[test]
fn richardson_order_at_least_two_ish() {
    // halve dx and dt together on smooth data; errors against the finest
    // solve should contract by ~4
    let p = params();
    let target = |m: usize, steps: usize| {
        let grid = Grid::new(m);
        let gamma = grid.sample(|x| 0.4 + 0.2 * (std::f64::consts::PI * x).sin());
        solve_hydrodynamic(&gamma, &p, TimeGrid::new(0.05, steps)).unwrap()
    };
    let coarse = target(64, 80);
    let mid = target(128, 160);
    let fine = target(256, 320);
    // compare at the shared final time on the coarse nodes
    let err_coarse: f64 = (0..=64)
        .map(|j| (coarse.value(coarse.steps(), j) - fine.value(fine.steps(), 4 * j)).abs())
        .fold(0.0, f64::max);
    let err_mid: f64 = (0..=128)
        .map(|j| (mid.value(mid.steps(), j) - fine.value(fine.steps(), 2 * j)).abs())
        .fold(0.0, f64::max);
    let order = (err_coarse / err_mid).log2();
    assert!(
        order >= 1.9,
        "observed order {order} (errors {err_coarse} / {err_mid})"
    );
}

#[test]
fn maximum_principle_homogeneous() {
    let p = params();
    let grid = Grid::new(256);
    let phi = grid.sample(|x| 0.5 * (3.0 * std::f64::consts::PI * x).sin() - 0.1);
    let u = solve_robin_homogeneous(
        &phi,
        &p,
        TimeGrid::new(0.2, 256),
        HomogeneousMethod::FiniteDifference,
    )
    .unwrap();
    let lo = phi
        .values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .min(0.0);
    let hi = phi
        .values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let (ulo, uhi) = u.bounds();
    assert!(ulo >= lo - 1e-9, "{ulo} < {lo}");
    assert!(uhi <= hi + 1e-9, "{uhi} > {hi}");
}

#[test]
fn strict_confinement_below_a_positive_bound() {
    // phi <= b with b > 0 forces u(t) <= b - eps(t0) for t >= t0
    let p = params();
    let grid = Grid::new(256);
    let b = 0.5;
    // phi <= b with the bound attained at the interior maximum x = 1/2
    let phi = grid.sample(|x| b - 0.3 * b * (2.0 * x - 1.0) * (2.0 * x - 1.0));
    let u = solve_robin_homogeneous(
        &phi,
        &p,
        TimeGrid::new(0.3, 512),
        HomogeneousMethod::FiniteDifference,
    )
    .unwrap();
    for i in [u.steps() / 4, u.steps() / 2, u.steps()] {
        let sup = u.slice(i).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            sup < b - 1e-4,
            "t index {i}: sup {sup} not strictly below {b}"
        );
    }
}

#[test]
fn hydrodynamic_bounds_hold_nodewise() {
    let p = params();
    let grid = Grid::new(256);
    // rough step data
    let gamma = grid.sample(|x| if x < 0.5 { 1.0 } else { 0.0 });
    let u = solve_hydrodynamic(&gamma, &p, TimeGrid::new(0.25, 512)).unwrap();
    let lo = p.alpha.min(0.0_f64.max(0.0)); // min(alpha, ess inf gamma) = 0
    let hi = p.beta.max(1.0); // max(beta, ess sup gamma) = 1
    let (ulo, uhi) = u.bounds();
    assert!(ulo >= 0.0_f64.min(lo) - 1e-9, "{ulo}");
    assert!(uhi <= hi + 1e-9, "{uhi}");
}

#[test]
fn long_run_decays_to_the_stationary_profile() {
    let p = params();
    let grid = Grid::new(512);
    let rho = stationary_profile(&p);
    let gamma = grid.sample(|x| if x < 0.5 { 1.0 } else { 0.0 });
    let u = solve_hydrodynamic(&gamma, &p, TimeGrid::new(10.0, 2048)).unwrap();
    let sup = grid
        .nodes()
        .enumerate()
        .map(|(j, x)| (u.value(u.steps(), j) - rho.value(x)).abs())
        .fold(0.0_f64, f64::max);
    assert!(
        sup < 1e-6,
        "distance to stationary profile after t=10: {sup}"
    );
}

/// Weak-form residual of a solved path against a space-time test function:
/// the identity of generalized solutions (with the reservoir boundary terms,
/// plus the tilt transport when a field is present) must hold to scheme
/// order.
#[allow(clippy::too_many_arguments)]
fn weak_form_residual(
    u: &robin_sep_core::pde::DensityPath,
    p: &ReservoirParams,
    field: Option<&robin_sep_core::model::TiltField>,
    g: &dyn Fn(f64, f64) -> f64,
    dtg: &dyn Fn(f64, f64) -> f64,
    dxg: &dyn Fn(f64, f64) -> f64,
) -> f64 {
    use robin_sep_core::grid::{simpson, trapezoid_nonuniform};
    use robin_sep_core::rate::boundary_p;
    let grid = u.grid;
    let h = grid.h();
    let l = u.steps();
    let _t_final = u.horizon();
    let pair = |i: usize, f: &dyn Fn(f64, f64) -> f64, weights: &dyn Fn(usize, f64) -> f64| {
        let t = u.times[i];
        let vals: Vec<f64> = grid
            .nodes()
            .enumerate()
            .map(|(j, x)| weights(j, x) * f(t, x))
            .collect();
        simpson(&vals, h)
    };
    let ends = pair(l, g, &|j, _| u.value(l, j)) - pair(0, g, &|j, _| u.value(0, j));
    let mut dt_term = Vec::with_capacity(l + 1);
    let mut grad_term = Vec::with_capacity(l + 1);
    let mut bdry_term = Vec::with_capacity(l + 1);
    for i in 0..=l {
        let t = u.times[i];
        dt_term.push(pair(i, dtg, &|j, _| u.value(i, j)));
        let du = u.space_gradient(i);
        let sig_flux: Vec<f64> = grid
            .nodes()
            .enumerate()
            .map(|(j, x)| {
                let tilt =
                    field.map(|f| 2.0 * robin_sep_core::mobility(u.value(i, j)) * f.gradient(t, x));
                (-du[j] + tilt.unwrap_or(0.0)) * dxg(t, x)
            })
            .collect();
        grad_term.push(simpson(&sig_flux, h));
        let (u0, u1) = u.traces(i);
        let b = match field {
            Some(f) => {
                boundary_p(p.beta, p.cap_b, u1, f.value(t, 1.0)) * g(t, 1.0)
                    + boundary_p(p.alpha, p.cap_a, u0, f.value(t, 0.0)) * g(t, 0.0)
            }
            None => -(u1 - p.beta) / p.cap_b * g(t, 1.0) - (u0 - p.alpha) / p.cap_a * g(t, 0.0),
        };
        bdry_term.push(b);
    }
    let lhs = ends - trapezoid_nonuniform(&u.times, &dt_term);
    let rhs =
        trapezoid_nonuniform(&u.times, &grad_term) + trapezoid_nonuniform(&u.times, &bdry_term);
    (lhs - rhs).abs()
}

#[test]
fn weak_form_identity_for_random_test_functions() {
    use rand::{Rng, SeedableRng};
    let p = params();
    let grid = Grid::new(256);
    let gamma = grid.sample(|x| 0.45 + 0.2 * (std::f64::consts::PI * x).sin());
    let time = TimeGrid::new(0.1, 512);
    let hydro = solve_hydrodynamic(&gamma, &p, time).unwrap();
    let field = robin_sep_core::model::TiltField::sine(0.4, 1, 0.05);
    let tilted = robin_sep_core::pde::solve_controlled(&gamma, &p, &field, time).unwrap();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
    for trial in 0..10 {
        // random space-time polynomial-and-wave test function
        let c: [f64; 5] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let k = 1.0 + (trial % 3) as f64;
        let g = move |t: f64, x: f64| {
            c[0] + c[1] * x + c[2] * x * x + c[3] * (k * x).cos() + c[4] * t * x
        };
        let dtg = move |_t: f64, x: f64| c[4] * x;
        let dxg = move |t: f64, x: f64| c[1] + 2.0 * c[2] * x - c[3] * k * (k * x).sin() + c[4] * t;
        let r_hydro = weak_form_residual(&hydro, &p, None, &g, &dtg, &dxg);
        assert!(
            r_hydro < 5e-5,
            "trial {trial}: hydro weak-form residual {r_hydro}"
        );
        let r_tilted = weak_form_residual(&tilted, &p, Some(&field), &g, &dtg, &dxg);
        assert!(
            r_tilted < 5e-5,
            "trial {trial}: tilted weak-form residual {r_tilted}"
        );
    }
}

#[test]
fn energy_is_stable_under_refinement() {
    let p = params();
    let energy_at = |m: usize, steps: usize| {
        let g = Grid::new(m);
        let gamma = g.sample(|x| 0.4 + 0.2 * (std::f64::consts::PI * x).sin());
        let u = solve_hydrodynamic(&gamma, &p, TimeGrid::new(0.05, steps)).unwrap();
        robin_sep_core::rate::energy(&u).q_value
    };
    let coarse = energy_at(64, 80);
    let mid = energy_at(128, 160);
    let fine = energy_at(256, 320);
    assert!(coarse.is_finite() && fine > 0.0);
    let d1 = (mid - coarse).abs();
    let d2 = (fine - mid).abs();
    assert!(d2 < 0.5 * d1 + 1e-12, "refinement drift {d1} -> {d2}");
}
