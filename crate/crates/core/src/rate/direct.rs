//! Closed-form rate evaluation through the elliptic flux reduction.
//!
//! On a smooth path the generating field satisfies, slice by slice,
//! `2 grad(sigma(u) grad H) = Lap u - dt u` together with two nonlinear
//! Robin conditions. Writing `G = sigma(u) grad H`, the bulk equation
//! integrates to `G(x) = G(0) + [grad u(x) - grad u(0)]/2 - Q(x)/2` with
//! `Q(x) = int_0^x dt u`, leaving exactly two unknowns `(G(0), H(0))` that a
//! 2x2 Newton pins through the boundary conditions. The rate is then the
//! time integral of `int G^2/sigma(u) dx` plus the boundary cost terms.

use super::boundary::{boundary_c, boundary_p, boundary_p_dm};
use super::RateError;
use crate::grid::{cumulative, simpson, trapezoid_nonuniform, Grid};
use crate::mobility;
use crate::params::ReservoirParams;
use crate::pde::DensityPath;

/// Evaluated rate with its bulk/boundary split and the energy pair.
#[derive(Debug, Clone)]
pub struct RateBreakdown {
    pub i_total: f64,
    pub i_bulk: f64,
    pub i_boundary: f64,
    /// Per-time-node values of the bulk integrand.
    pub bulk_integrand: Vec<f64>,
    /// Per-time-node values of the two boundary cost terms combined.
    pub boundary_integrand: Vec<f64>,
    /// Energy `Q = 1/2 int int (grad u)^2`.
    pub energy: f64,
    /// `int int (grad u)^2 / sigma(u)` with the diagnostic clamp.
    pub strong_energy: f64,
}

/// The recovered field `H_t` and its gradient on the path's grids (row-major
/// in time).
#[derive(Debug, Clone)]
pub struct RecoveredField {
    pub times: Vec<f64>,
    pub grid: Grid,
    pub values: Vec<f64>,
    pub gradients: Vec<f64>,
}

impl RecoveredField {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.len() + j]
    }

    pub fn gradient(&self, i: usize, j: usize) -> f64 {
        self.gradients[i * self.grid.len() + j]
    }
}

const NEWTON_MAX: usize = 60;
const NEWTON_TOL: f64 = 1e-12;

pub fn rate_direct(
    u: &DensityPath,
    params: &ReservoirParams,
) -> Result<(RateBreakdown, RecoveredField), RateError> {
    let (lo, hi) = u.bounds();
    if lo <= 1e-9 || hi >= 1.0 - 1e-9 {
        return Err(RateError::DegeneratePath { min: lo, max: hi });
    }
    let grid = u.grid;
    let h = grid.h();
    let w = grid.len();
    let l = u.steps();

    let mut bulk_integrand = Vec::with_capacity(l + 1);
    let mut boundary_integrand = Vec::with_capacity(l + 1);
    let mut energy_t = Vec::with_capacity(l + 1);
    let mut strong_t = Vec::with_capacity(l + 1);
    let mut field_values = vec![0.0; (l + 1) * w];
    let mut field_gradients = vec![0.0; (l + 1) * w];

    // warm start across slices: the generating field is continuous in time
    let mut g0 = 0.0_f64;
    let mut h0 = 0.0_f64;
    for i in 0..=l {
        let ut = u.slice(i);
        let dtu = u.time_derivative(i);
        let du = u.space_gradient(i);
        let q = cumulative(&dtu, h);
        let inv_sigma: Vec<f64> = ut.iter().map(|v| 1.0 / mobility(*v)).collect();
        // G(x) = g0 + base(x)
        let base: Vec<f64> = (0..w).map(|j| 0.5 * (du[j] - du[0]) - 0.5 * q[j]).collect();
        let s1 = simpson(&inv_sigma, h);
        let base_over_sigma: Vec<f64> = base.iter().zip(&inv_sigma).map(|(b, is)| b * is).collect();
        let s2 = simpson(&base_over_sigma, h);
        let (ul, ur) = (ut[0], ut[w - 1]);
        let (dul, dur) = (du[0], du[w - 1]);
        let base_end = base[w - 1];

        // Newton on (g0, h0); h1 = h0 + g0 s1 + s2 is affine in the unknowns
        let mut converged = false;
        for _ in 0..NEWTON_MAX {
            let h1 = h0 + g0 * s1 + s2;
            let r1 = dul - 2.0 * g0 + boundary_p(params.alpha, params.cap_a, ul, h0);
            let r2 = dur - 2.0 * (g0 + base_end) - boundary_p(params.beta, params.cap_b, ur, h1);
            let norm = r1.abs().max(r2.abs());
            if norm < NEWTON_TOL {
                converged = true;
                break;
            }
            let pa = boundary_p_dm(params.alpha, params.cap_a, ul, h0);
            let pb = boundary_p_dm(params.beta, params.cap_b, ur, h1);
            let j11 = -2.0;
            let j12 = pa;
            let j21 = -2.0 - pb * s1;
            let j22 = -pb;
            let det = j11 * j22 - j12 * j21;
            if det.abs() < 1e-300 {
                return Err(RateError::NewtonDiverged {
                    slice: i,
                    residual: norm,
                });
            }
            let mut dg = (-r1 * j22 + r2 * j12) / det;
            let mut dh = (-j11 * r2 + j21 * r1) / det;
            // Armijo halving on the residual norm
            let mut improved = false;
            for _ in 0..40 {
                let (tg, th) = (g0 + dg, h0 + dh);
                let th1 = th + tg * s1 + s2;
                let t1 = dul - 2.0 * tg + boundary_p(params.alpha, params.cap_a, ul, th);
                let t2 =
                    dur - 2.0 * (tg + base_end) - boundary_p(params.beta, params.cap_b, ur, th1);
                if t1.abs().max(t2.abs()) < norm {
                    g0 = tg;
                    h0 = th;
                    improved = true;
                    break;
                }
                dg *= 0.5;
                dh *= 0.5;
            }
            if !improved {
                return Err(RateError::NewtonDiverged {
                    slice: i,
                    residual: norm,
                });
            }
        }
        if !converged {
            let h1 = h0 + g0 * s1 + s2;
            let r1 = dul - 2.0 * g0 + boundary_p(params.alpha, params.cap_a, ul, h0);
            let r2 = dur - 2.0 * (g0 + base_end) - boundary_p(params.beta, params.cap_b, ur, h1);
            return Err(RateError::NewtonDiverged {
                slice: i,
                residual: r1.abs().max(r2.abs()),
            });
        }

        let h1 = h0 + g0 * s1 + s2;
        // slice integrand int sigma (grad H)^2 = int G^2 / sigma
        let gsq: Vec<f64> = base
            .iter()
            .zip(&inv_sigma)
            .map(|(b, is)| (g0 + b) * (g0 + b) * is)
            .collect();
        bulk_integrand.push(simpson(&gsq, h));
        boundary_integrand.push(
            boundary_c(params.alpha, params.cap_a, ul, h0)
                + boundary_c(params.beta, params.cap_b, ur, h1),
        );
        // recovered field: H(x) = h0 + int_0^x G / sigma
        let g_over_sigma: Vec<f64> = base
            .iter()
            .zip(&inv_sigma)
            .map(|(b, is)| (g0 + b) * is)
            .collect();
        let hx = cumulative(&g_over_sigma, h);
        for j in 0..w {
            field_values[i * w + j] = h0 + hx[j];
            field_gradients[i * w + j] = g_over_sigma[j];
        }
        // energy ledger
        let du_sq: Vec<f64> = du.iter().map(|d| d * d).collect();
        energy_t.push(simpson(&du_sq, h));
        let strong: Vec<f64> = du
            .iter()
            .zip(ut)
            .map(|(d, v)| d * d / mobility(v.clamp(1e-12, 1.0 - 1e-12)))
            .collect();
        strong_t.push(simpson(&strong, h));
    }

    let combined: Vec<f64> = bulk_integrand
        .iter()
        .zip(&boundary_integrand)
        .map(|(a, b)| a + b)
        .collect();
    let i_total = trapezoid_nonuniform(&u.times, &combined);
    let i_bulk = trapezoid_nonuniform(&u.times, &bulk_integrand);
    let i_boundary = trapezoid_nonuniform(&u.times, &boundary_integrand);
    let breakdown = RateBreakdown {
        i_total,
        i_bulk,
        i_boundary,
        bulk_integrand,
        boundary_integrand,
        energy: 0.5 * trapezoid_nonuniform(&u.times, &energy_t),
        strong_energy: trapezoid_nonuniform(&u.times, &strong_t),
    };
    let recovered = RecoveredField {
        times: u.times.clone(),
        grid,
        values: field_values,
        gradients: field_gradients,
    };
    Ok((breakdown, recovered))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::pde::{solve_hydrodynamic, stationary_profile, DensityPath, TimeGrid};

    fn params() -> ReservoirParams {
        ReservoirParams::new(0.2, 0.8, 1.0, 1.0).unwrap()
    }

    #[test]
    fn stationary_path_has_zero_rate_and_zero_field() {
        let p = params();
        let grid = Grid::new(128);
        let rho = stationary_profile(&p);
        let times: Vec<f64> = (0..=64).map(|i| i as f64 * 0.25 / 64.0).collect();
        let u = DensityPath::constant(times, grid, &rho.sample(grid));
        let (b, f) = rate_direct(&u, &p).unwrap();
        assert!(b.i_total.abs() < 1e-12, "I = {}", b.i_total);
        assert!(f.values.iter().all(|v| v.abs() < 1e-9));
        assert!(f.gradients.iter().all(|v| v.abs() < 1e-9));
        assert!((b.energy - 0.5 * 0.25 * rho.slope * rho.slope).abs() < 1e-15);
    }

    #[test]
    fn relaxing_hydrodynamic_path_has_tiny_rate() {
        let p = params();
        let grid = Grid::new(256);
        let gamma = grid.sample(|x| 0.5 + 0.15 * (std::f64::consts::PI * x).cos());
        let u = solve_hydrodynamic(&gamma, &p, TimeGrid::new(0.1, 512)).unwrap();
        let (b, _) = rate_direct(&u, &p).unwrap();
        assert!(b.i_total >= -1e-12);
        // floor set by the O(dt^2 + h^2) discretization of the path itself
        assert!(b.i_total < 1e-6, "I = {}", b.i_total);
    }

    #[test]
    fn degenerate_path_is_rejected() {
        let grid = Grid::new(32);
        let times = vec![0.0, 0.1, 0.2];
        let u = DensityPath::constant(times, grid, &vec![0.0; grid.len()]);
        assert!(matches!(
            rate_direct(&u, &params()),
            Err(RateError::DegeneratePath { .. })
        ));
    }
}
