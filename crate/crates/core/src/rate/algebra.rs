//! Path-cost algebra: subadditivity under time splits and monotonicity under
//! restriction, checked through the direct evaluation.

use super::direct::rate_direct;
use super::RateError;
use crate::params::ReservoirParams;
use crate::pde::DensityPath;

#[derive(Debug, Clone)]
pub struct PathCostReport {
    pub i_full: f64,
    pub i_first: f64,
    pub i_second_shifted: f64,
    pub tolerance: f64,
    pub subadditive: bool,
    pub restriction_monotone: bool,
}

/// Splits the path at the time node closest to `split`, evaluates the rate
/// on `[0,T]`, `[0,S]` and the shifted `[S,T]`, and verifies
/// `I_[0,T] <= I_[0,S] + I_[0,T-S](shift) + tol` and `I_[0,S] <= I_[0,T] + tol`
/// with `tol = 1e-3 (1 + I_[0,T])`.
pub fn path_cost_algebra_check(
    u: &DensityPath,
    params: &ReservoirParams,
    split: f64,
) -> Result<PathCostReport, RateError> {
    assert!(split > 0.0 && split < u.horizon());
    let split_index = u
        .times
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (*a - split).abs().partial_cmp(&(*b - split).abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    assert!(
        split_index > 0 && split_index < u.steps(),
        "split too close to the ends"
    );

    let (full, _) = rate_direct(u, params)?;
    let first = u.window(0, split_index);
    let second = u.window(split_index, u.steps());
    let (i_first, _) = rate_direct(&first, params)?;
    let (i_second, _) = rate_direct(&second, params)?;

    let tolerance = 1e-3 * (1.0 + full.i_total);
    Ok(PathCostReport {
        i_full: full.i_total,
        i_first: i_first.i_total,
        i_second_shifted: i_second.i_total,
        tolerance,
        subadditive: full.i_total <= i_first.i_total + i_second.i_total + tolerance,
        restriction_monotone: i_first.i_total <= full.i_total + tolerance
            && i_second.i_total <= full.i_total + tolerance,
    })
}
