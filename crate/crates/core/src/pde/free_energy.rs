//! Free-energy balance along hydrodynamic solutions: the dissipation plus
//! boundary log-odds costs must equal the drop of the entropy functional
//! `F_0(r) = r log r + (1-r) log(1-r)`.

use super::{DensityPath, PdeError};
use crate::grid::{simpson, trapezoid_nonuniform};
use crate::logit;
use crate::mobility;
use crate::params::ReservoirParams;

/// Per-time ledger of the identity; `lhs`/`rhs` are cumulative from 0 to
/// `times[i]`, so `gap` tracks the balance over every window `[0, t]`.
#[derive(Debug, Clone)]
pub struct FreeEnergyLedger {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub gap: Vec<f64>,
}

fn entropy_density(r: f64) -> f64 {
    let mut acc = 0.0;
    if r > 0.0 {
        acc += r * r.ln();
    }
    if r < 1.0 {
        acc += (1.0 - r) * (1.0 - r).ln();
    }
    acc
}

pub fn free_energy_diagnostic(
    u: &DensityPath,
    params: &ReservoirParams,
) -> Result<FreeEnergyLedger, PdeError> {
    let (lo, hi) = u.bounds();
    if lo <= 1e-12 || hi >= 1.0 - 1e-12 {
        return Err(PdeError::DegenerateDensity { min: lo, max: hi });
    }
    let grid = u.grid;
    let h = grid.h();
    let l = u.steps();

    let mut dissipation = Vec::with_capacity(l + 1);
    let mut entropy = Vec::with_capacity(l + 1);
    for i in 0..=l {
        let ut = u.slice(i);
        let du = u.space_gradient(i);
        let integrand: Vec<f64> = du
            .iter()
            .zip(ut)
            .map(|(d, v)| {
                let s = mobility(v.clamp(1e-12, 1.0 - 1e-12));
                d * d / s
            })
            .collect();
        let (u0, u1) = u.traces(i);
        let boundary = (u0 - params.alpha) * logit(u0) / params.cap_a
            + (u1 - params.beta) * logit(u1) / params.cap_b;
        dissipation.push(simpson(&integrand, h) + boundary);
        let f0: Vec<f64> = ut.iter().map(|v| entropy_density(*v)).collect();
        entropy.push(simpson(&f0, h));
    }

    let mut lhs = Vec::with_capacity(l + 1);
    let mut rhs = Vec::with_capacity(l + 1);
    let mut gap = Vec::with_capacity(l + 1);
    for i in 0..=l {
        let lhs_i = trapezoid_nonuniform(&u.times[..=i], &dissipation[..=i]);
        let rhs_i = entropy[0] - entropy[i];
        lhs.push(lhs_i);
        rhs.push(rhs_i);
        gap.push(lhs_i - rhs_i);
    }
    Ok(FreeEnergyLedger {
        times: u.times.clone(),
        lhs,
        rhs,
        gap,
    })
}
