//! Bulk/boundary decomposition of the rate functional.
//!
//! The interior piece is the weighted negative-Sobolev norm of the path's
//! time derivative plus transport term, evaluated through the representer
//! `M_t(x) = -int_0^x dt u + c_t` with the constant shift `c_t` chosen so
//! `<M_t / sigma(u_t)> = 0`. The boundary piece integrates the
//! two-dimensional Legendre transform of the boundary cost at the charges
//! `(a_t, b_t)` carried by the normalized conductance coordinate `Xi`.

use super::boundary::{boundary_b, boundary_p, boundary_p_dm, boundary_q};
use super::direct::RateBreakdown;
use super::RateError;
use crate::grid::{cumulative, simpson, trapezoid_nonuniform};
use crate::mobility;
use crate::params::ReservoirParams;
use crate::pde::DensityPath;

/// Per-time diagnostics of the decomposition.
#[derive(Debug, Clone)]
pub struct BoundaryDecomposition {
    /// `Xi(t, x)` row-major: normalized cumulative of `1/sigma(u_t)`.
    pub xi: Vec<f64>,
    /// `zeta_t = 1 / <1/sigma(u_t)>`.
    pub zeta: Vec<f64>,
    /// Boundary charges.
    pub a_t: Vec<f64>,
    pub b_t: Vec<f64>,
    /// Representer `M_t(x)` row-major.
    pub m_field: Vec<f64>,
    /// Gauge correction `R_t`.
    pub r_t: Vec<f64>,
    /// The shift constants `c_t`.
    pub c_t: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Decomposed {
    /// `i_bulk` carries the interior piece, `i_boundary` the Legendre piece.
    pub breakdown: RateBreakdown,
    pub boundary: BoundaryDecomposition,
}

const LEGENDRE_MAX: usize = 80;
const LEGENDRE_TOL: f64 = 1e-12;

/// Maximizes `a x + b y - Upsilon(x, y)` by damped Newton on the strictly
/// convex dual; returns (x, y, value).
#[allow(clippy::too_many_arguments)]
fn legendre_point(
    zeta: f64,
    alpha: f64,
    cap_a: f64,
    beta: f64,
    cap_b: f64,
    u0: f64,
    u1: f64,
    a: f64,
    b: f64,
    start: (f64, f64),
    slice: usize,
    use_q: bool,
) -> Result<(f64, f64, f64), RateError> {
    let cost = |m: f64, rho: f64, d: f64, trace: f64| {
        if use_q {
            boundary_q(rho, d, trace, m)
        } else {
            boundary_b(rho, d, trace, m)
        }
    };
    let cost_deriv = |m: f64, rho: f64, d: f64, trace: f64| {
        // d/dM q = p - (rho - trace)/D
        let p = boundary_p(rho, d, trace, m);
        if use_q {
            p - (rho - trace) / d
        } else {
            p
        }
    };
    let (mut x, mut y) = start;
    let upsilon = |x: f64, y: f64| {
        zeta * (x - y) * (x - y) + cost(x, alpha, cap_a, u0) + cost(y, beta, cap_b, u1)
    };
    let dual = |x: f64, y: f64| upsilon(x, y) - a * x - b * y; // minimized
    let mut obj = dual(x, y);
    let scale = 1.0 + a.abs() + b.abs();
    for _ in 0..LEGENDRE_MAX {
        let gx = 2.0 * zeta * (x - y) + cost_deriv(x, alpha, cap_a, u0) - a;
        let gy = -2.0 * zeta * (x - y) + cost_deriv(y, beta, cap_b, u1) - b;
        let gnorm = gx.abs().max(gy.abs());
        if gnorm < LEGENDRE_TOL * scale {
            return Ok((x, y, a * x + b * y - upsilon(x, y)));
        }
        let hxx = 2.0 * zeta + boundary_p_dm(alpha, cap_a, u0, x);
        let hyy = 2.0 * zeta + boundary_p_dm(beta, cap_b, u1, y);
        let hxy = -2.0 * zeta;
        let det = hxx * hyy - hxy * hxy;
        if det <= 0.0 {
            return Err(RateError::LegendreFailed {
                slice,
                gradient_norm: gnorm,
            });
        }
        let dx = (-gx * hyy + gy * hxy) / det;
        let dy = (-hxx * gy + hxy * gx) / det;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let trial = dual(x + step * dx, y + step * dy);
            if trial < obj {
                x += step * dx;
                y += step * dy;
                obj = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // stalled at rounding level: accept if the gradient is already small
            if gnorm < 1e-7 * scale {
                return Ok((x, y, a * x + b * y - upsilon(x, y)));
            }
            return Err(RateError::LegendreFailed {
                slice,
                gradient_norm: gnorm,
            });
        }
    }
    let gx = 2.0 * zeta * (x - y) + cost_deriv(x, alpha, cap_a, u0) - a;
    let gy = -2.0 * zeta * (x - y) + cost_deriv(y, beta, cap_b, u1) - b;
    let gnorm = gx.abs().max(gy.abs());
    if gnorm < 1e-7 * scale {
        return Ok((x, y, a * x + b * y - upsilon(x, y)));
    }
    Err(RateError::LegendreFailed {
        slice,
        gradient_norm: gnorm,
    })
}

/// Public entry for the shifted (nonnegative-cost) transform; used by tests
/// of the shift identity.
pub fn legendre_shifted(
    params: &ReservoirParams,
    zeta: f64,
    u0: f64,
    u1: f64,
    a: f64,
    b: f64,
) -> Result<f64, RateError> {
    legendre_point(
        zeta,
        params.alpha,
        params.cap_a,
        params.beta,
        params.cap_b,
        u0,
        u1,
        a,
        b,
        (0.0, 0.0),
        0,
        true,
    )
    .map(|(_, _, v)| v)
}

/// Public entry for the plain transform.
pub fn legendre_plain(
    params: &ReservoirParams,
    zeta: f64,
    u0: f64,
    u1: f64,
    a: f64,
    b: f64,
) -> Result<f64, RateError> {
    legendre_point(
        zeta,
        params.alpha,
        params.cap_a,
        params.beta,
        params.cap_b,
        u0,
        u1,
        a,
        b,
        (0.0, 0.0),
        0,
        false,
    )
    .map(|(_, _, v)| v)
}

pub fn rate_decomposed(u: &DensityPath, params: &ReservoirParams) -> Result<Decomposed, RateError> {
    let (lo, hi) = u.bounds();
    if lo <= 1e-9 || hi >= 1.0 - 1e-9 {
        return Err(RateError::DegeneratePath { min: lo, max: hi });
    }
    let grid = u.grid;
    let h = grid.h();
    let w = grid.len();
    let l = u.steps();

    let mut xi_all = vec![0.0; (l + 1) * w];
    let mut m_all = vec![0.0; (l + 1) * w];
    let mut zeta_t = Vec::with_capacity(l + 1);
    let mut a_all = Vec::with_capacity(l + 1);
    let mut b_all = Vec::with_capacity(l + 1);
    let mut r_all = Vec::with_capacity(l + 1);
    let mut c_all = Vec::with_capacity(l + 1);
    let mut i1_t = Vec::with_capacity(l + 1);
    let mut i2_t = Vec::with_capacity(l + 1);
    let mut energy_t = Vec::with_capacity(l + 1);
    let mut strong_t = Vec::with_capacity(l + 1);

    let mut warm = (0.0_f64, 0.0_f64);
    for i in 0..=l {
        let ut = u.slice(i);
        let dtu = u.time_derivative(i);
        let du = u.space_gradient(i);
        let inv_sigma: Vec<f64> = ut.iter().map(|v| 1.0 / mobility(*v)).collect();
        let total_inv = simpson(&inv_sigma, h);
        let zeta = 1.0 / total_inv;
        zeta_t.push(zeta);

        // Xi_t: normalized cumulative conductance coordinate
        let xi_raw = cumulative(&inv_sigma, h);
        let xi_end = xi_raw[w - 1];
        for j in 0..w {
            xi_all[i * w + j] = xi_raw[j] / xi_end;
        }

        // representer M_t = -Q + c_t with <M/sigma> = 0
        let q = cumulative(&dtu, h);
        let q_over_sigma: Vec<f64> = q.iter().zip(&inv_sigma).map(|(a, b)| a * b).collect();
        let c_t = simpson(&q_over_sigma, h) / total_inv;
        c_all.push(c_t);
        for j in 0..w {
            m_all[i * w + j] = -q[j] + c_t;
        }

        // I1 integrand: (||M + grad u||^2_{1/sigma} - R_t)/4
        let m_plus: Vec<f64> = (0..w)
            .map(|j| {
                let s = m_all[i * w + j] + du[j];
                s * s * inv_sigma[j]
            })
            .collect();
        let weighted_norm = simpson(&m_plus, h);
        let du_over_sigma: Vec<f64> = du.iter().zip(&inv_sigma).map(|(a, b)| a * b).collect();
        let logit_gap = simpson(&du_over_sigma, h);
        let r_t = logit_gap * logit_gap * zeta;
        r_all.push(r_t);
        i1_t.push(0.25 * (weighted_norm - r_t));

        // boundary charges
        let grad_xi_pair = logit_gap * zeta; // <grad u, grad Xi> with grad Xi = (1/sigma)/<1/sigma>
        let dtu_one_minus_xi: Vec<f64> =
            (0..w).map(|j| dtu[j] * (1.0 - xi_all[i * w + j])).collect();
        let dtu_xi: Vec<f64> = (0..w).map(|j| dtu[j] * xi_all[i * w + j]).collect();
        let a_t = simpson(&dtu_one_minus_xi, h) - grad_xi_pair;
        let b_t = simpson(&dtu_xi, h) + grad_xi_pair;
        a_all.push(a_t);
        b_all.push(b_t);

        let (u0, u1) = (ut[0], ut[w - 1]);
        let (x, y, phi) = legendre_point(
            zeta,
            params.alpha,
            params.cap_a,
            params.beta,
            params.cap_b,
            u0,
            u1,
            a_t,
            b_t,
            warm,
            i,
            false,
        )?;
        warm = (x, y);
        i2_t.push(phi);

        let du_sq: Vec<f64> = du.iter().map(|d| d * d).collect();
        energy_t.push(simpson(&du_sq, h));
        let strong: Vec<f64> = du
            .iter()
            .zip(ut)
            .map(|(d, v)| d * d / mobility(v.clamp(1e-12, 1.0 - 1e-12)))
            .collect();
        strong_t.push(simpson(&strong, h));
    }

    let i_bulk = trapezoid_nonuniform(&u.times, &i1_t);
    let i_boundary = trapezoid_nonuniform(&u.times, &i2_t);
    let breakdown = RateBreakdown {
        i_total: i_bulk + i_boundary,
        i_bulk,
        i_boundary,
        bulk_integrand: i1_t,
        boundary_integrand: i2_t,
        energy: 0.5 * trapezoid_nonuniform(&u.times, &energy_t),
        strong_energy: trapezoid_nonuniform(&u.times, &strong_t),
    };
    Ok(Decomposed {
        breakdown,
        boundary: BoundaryDecomposition {
            xi: xi_all,
            zeta: zeta_t,
            a_t: a_all,
            b_t: b_all,
            m_field: m_all,
            r_t: r_all,
            c_t: c_all,
        },
    })
}
