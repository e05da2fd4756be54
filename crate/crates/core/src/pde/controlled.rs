//! Semi-implicit solver for the controlled (tilted) hydrodynamic equation:
//! diffusion is Crank-Nicolson implicit, the drift `-2 grad(sigma(u) grad H)`
//! is explicit in conservative flux form with a predictor-corrector pass for
//! second order, and the nonlinear Robin flux is resolved per step by a
//! damped Newton iteration whose Jacobian stays tridiagonal.

use super::solver::{thomas, TimeGrid};
use super::{DensityPath, PdeError};
use crate::grid::GridFunction;
use crate::mobility;
use crate::model::TiltField;
use crate::params::ReservoirParams;
use crate::rate::{boundary_p, boundary_p_da};

const MAX_DT_HALVINGS: usize = 6;
const NEWTON_TOL: f64 = 1e-13;
const RANNACHER_STEPS: usize = 2;

pub fn solve_controlled(
    gamma: &GridFunction,
    params: &ReservoirParams,
    field: &TiltField,
    time: TimeGrid,
) -> Result<DensityPath, PdeError> {
    assert!(
        gamma
            .values
            .iter()
            .all(|v| (-1e-12..=1.0 + 1e-12).contains(v)),
        "initial profile must take values in [0,1]"
    );
    let mut refine = 1usize;
    let mut retries = 0usize;
    loop {
        match march(gamma, params, field, time, refine) {
            Ok(path) => return Ok(path),
            Err(PdeError::CflExceeded { .. }) if retries < MAX_DT_HALVINGS => {
                retries += 1;
                refine *= 2;
            }
            Err(PdeError::BoundaryNewton { .. }) if retries < MAX_DT_HALVINGS => {
                retries += 1;
                refine *= 2;
            }
            Err(e) => {
                return Err(match e {
                    PdeError::CflExceeded { .. } => PdeError::CflExceeded { retries },
                    other => other,
                })
            }
        }
    }
}

struct Stepper<'a> {
    params: ReservoirParams,
    field: &'a TiltField,
    grid: crate::grid::Grid,
    dt: f64,
}

impl Stepper<'_> {
    /// Conservative explicit drift `-2 d/dx (sigma(u) grad H)` at every node;
    /// boundary rows see only their interior face (the boundary flux itself
    /// lives in the nonlinear Robin data).
    fn drift(&self, u: &[f64], t: f64, out: &mut [f64]) {
        let m = self.grid.m();
        let h = self.grid.h();
        let mut flux = vec![0.0; m]; // faces j+1/2
        for (j, f) in flux.iter_mut().enumerate() {
            let uf = 0.5 * (u[j] + u[j + 1]);
            let xf = (j as f64 + 0.5) * h;
            *f = mobility(uf) * self.field.gradient(t, xf);
        }
        for j in 1..m {
            out[j] = -2.0 * (flux[j] - flux[j - 1]) / h;
        }
        // half cells: 2/h * (drift part of J_{1/2} - 0) and 2/h * (0 - drift part of J_{m-1/2})
        out[0] = 2.0 / h * (-2.0 * flux[0]);
        out[m] = 2.0 / h * (2.0 * flux[m - 1]);
    }

    /// Diffusion plus nonlinear boundary flux at time `t`: interior second
    /// differences, half-cell flux balances at the ends.
    fn diffusion(&self, u: &[f64], t: f64, out: &mut [f64]) {
        let m = self.grid.m();
        let h = self.grid.h();
        let h2 = h * h;
        for j in 1..m {
            out[j] = (u[j - 1] - 2.0 * u[j] + u[j + 1]) / h2;
        }
        let p = &self.params;
        let j_half = (u[1] - u[0]) / h;
        let j_zero = -boundary_p(p.alpha, p.cap_a, u[0], self.field.value(t, 0.0));
        out[0] = 2.0 / h * (j_half - j_zero);
        let j_mhalf = (u[m] - u[m - 1]) / h;
        let j_one = boundary_p(p.beta, p.cap_b, u[m], self.field.value(t, 1.0));
        out[m] = 2.0 / h * (j_one - j_mhalf);
    }

    /// Solves `v - theta dt [diffusion(v, t_new)] = rhs` by damped Newton with
    /// a tridiagonal Jacobian (the nonlinearity sits in the corner rows).
    fn implicit_solve(
        &self,
        rhs: &[f64],
        t_new: f64,
        theta: f64,
        guess: &[f64],
        step: usize,
    ) -> Result<Vec<f64>, PdeError> {
        let m = self.grid.m();
        let h = self.grid.h();
        let h2 = h * h;
        let dt = self.dt * theta;
        let p = &self.params;
        let mut v = guess.to_vec();
        let mut diff = vec![0.0; m + 1];
        let residual = |v: &[f64], diff: &mut [f64]| -> Vec<f64> {
            self.diffusion(v, t_new, diff);
            (0..=m).map(|j| v[j] - dt * diff[j] - rhs[j]).collect()
        };
        let mut r = residual(&v, &mut diff);
        let mut rnorm = r.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        for _ in 0..30 {
            if rnorm < NEWTON_TOL * (1.0 + v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))) {
                return Ok(v);
            }
            let mut lower = vec![-dt / h2; m];
            let mut diag = vec![1.0 + 2.0 * dt / h2; m + 1];
            let mut upper = vec![-dt / h2; m];
            let h0 = self.field.value(t_new, 0.0);
            let h1 = self.field.value(t_new, 1.0);
            diag[0] =
                1.0 + 2.0 * dt / h2 - 2.0 * dt / h * boundary_p_da(p.alpha, p.cap_a, v[0], h0);
            upper[0] = -2.0 * dt / h2;
            diag[m] = 1.0 + 2.0 * dt / h2 - 2.0 * dt / h * boundary_p_da(p.beta, p.cap_b, v[m], h1);
            lower[m - 1] = -2.0 * dt / h2;
            let neg_r: Vec<f64> = r.iter().map(|x| -x).collect();
            let delta = thomas(&lower, &diag, &upper, &neg_r, step)?;
            // Armijo backtracking on the residual sup norm
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..8 {
                let trial: Vec<f64> = v.iter().zip(&delta).map(|(a, d)| a + scale * d).collect();
                let tr = residual(&trial, &mut diff);
                let tn = tr.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
                if tn < rnorm * (1.0 - 0.25 * scale) || tn < NEWTON_TOL {
                    v = trial;
                    r = tr;
                    rnorm = tn;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                return Err(PdeError::BoundaryNewton {
                    step,
                    residual: rnorm,
                });
            }
        }
        Err(PdeError::BoundaryNewton {
            step,
            residual: rnorm,
        })
    }
}

fn march(
    gamma: &GridFunction,
    params: &ReservoirParams,
    field: &TiltField,
    time: TimeGrid,
    refine: usize,
) -> Result<DensityPath, PdeError> {
    let grid = gamma.grid;
    let w = grid.len();
    let steps = time.steps * refine;
    let dt = time.t_final / steps as f64;
    let stepper = Stepper {
        params: *params,
        field,
        grid,
        dt,
    };
    let mut u = gamma.values.clone();
    let mut values = Vec::with_capacity((time.steps + 1) * w);
    values.extend_from_slice(&u);
    let mut d_now = vec![0.0; w];
    let mut d_pred = vec![0.0; w];
    let mut diff_now = vec![0.0; w];
    for step in 0..steps {
        let tn = step as f64 * dt;
        let tnp = tn + dt;
        let next = if step < RANNACHER_STEPS * refine {
            // implicit-Euler half steps; drift still explicit per half step
            let th = tn + 0.5 * dt;
            stepper.drift(&u, tn, &mut d_now);
            let rhs1: Vec<f64> = (0..w).map(|j| u[j] + 0.5 * dt * d_now[j]).collect();
            let half = stepper.implicit_solve(&rhs1, th, 0.5, &u, step)?;
            stepper.drift(&half, th, &mut d_pred);
            let rhs2: Vec<f64> = (0..w).map(|j| half[j] + 0.5 * dt * d_pred[j]).collect();
            stepper.implicit_solve(&rhs2, tnp, 0.5, &half, step)?
        } else {
            stepper.diffusion(&u, tn, &mut diff_now);
            stepper.drift(&u, tn, &mut d_now);
            // predictor: drift frozen at t_n
            let rhs_p: Vec<f64> = (0..w)
                .map(|j| u[j] + 0.5 * dt * diff_now[j] + dt * d_now[j])
                .collect();
            let pred = stepper.implicit_solve(&rhs_p, tnp, 0.5, &u, step)?;
            // corrector: trapezoidal drift
            stepper.drift(&pred, tnp, &mut d_pred);
            let rhs_c: Vec<f64> = (0..w)
                .map(|j| u[j] + 0.5 * dt * diff_now[j] + 0.5 * dt * (d_now[j] + d_pred[j]))
                .collect();
            stepper.implicit_solve(&rhs_c, tnp, 0.5, &pred, step)?
        };
        if next
            .iter()
            .any(|v| !v.is_finite() || *v < -0.05 || *v > 1.05)
        {
            return Err(PdeError::CflExceeded { retries: 0 });
        }
        u = next;
        if (step + 1) % refine == 0 {
            values.extend_from_slice(&u);
        }
    }
    Ok(DensityPath::new(time.times(), grid, values))
}
