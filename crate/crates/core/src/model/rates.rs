//! Jump-rate tables for the symmetric and tilted dynamics.
//!
//! Bulk exchange across a discordant bond runs at rate `N^2` (times the
//! exponential tilt of the field increment); flips at the boundary sites run
//! at rate `N/A`, `N/B` weighted by the reservoir densities. Concordant
//! bonds produce no state change and carry rate zero in the table.

use super::config::LatticeConfiguration;
use super::field::TiltField;
use crate::params::ReservoirParams;

/// One realizable event of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Exchange across bond `b` (0-based; sites `b` and `b+1`).
    Bond(u32),
    LeftFlip,
    RightFlip,
}

/// Per-event rates for a fixed configuration (and, for the tilted dynamics,
/// a fixed time).
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    /// Exchange rates for the `N - 2` bonds.
    pub bonds: Vec<f64>,
    pub left_flip: f64,
    pub right_flip: f64,
}

impl RateTable {
    pub fn total(&self) -> f64 {
        self.bonds.iter().sum::<f64>() + self.left_flip + self.right_flip
    }
}

pub fn ssep_rates(config: &LatticeConfiguration, params: &ReservoirParams) -> RateTable {
    let n = config.n_scale() as f64;
    let n2 = n * n;
    let bonds = (0..config.sites() - 1)
        .map(|b| {
            if config.occupied(b) != config.occupied(b + 1) {
                n2
            } else {
                0.0
            }
        })
        .collect();
    RateTable {
        bonds,
        left_flip: left_flip_rate(config, params, 0.0),
        right_flip: right_flip_rate(config, params, 0.0),
    }
}

pub fn wasep_rates(
    config: &LatticeConfiguration,
    params: &ReservoirParams,
    field: &TiltField,
    t: f64,
) -> RateTable {
    let n = config.n_scale() as f64;
    let n2 = n * n;
    let bonds = (0..config.sites() - 1)
        .map(|b| {
            let (l, r) = (config.occupied(b), config.occupied(b + 1));
            if l == r {
                return 0.0;
            }
            n2 * bond_tilt(field, t, config.n_scale(), b, l)
        })
        .collect();
    RateTable {
        bonds,
        left_flip: left_flip_rate(config, params, field.value(t, 1.0 / n)),
        right_flip: right_flip_rate(config, params, field.value(t, 1.0 - 1.0 / n)),
    }
}

/// Exponential tilt of an exchange across bond `b`:
/// `exp{-(eta_{k+1} - eta_k)[H(x_{k+1}) - H(x_k)]}` with `left = eta_k`.
#[inline]
pub(crate) fn bond_tilt(
    field: &TiltField,
    t: f64,
    n_scale: usize,
    b: usize,
    left_occupied: bool,
) -> f64 {
    let n = n_scale as f64;
    let dh = field.value(t, (b + 2) as f64 / n) - field.value(t, (b + 1) as f64 / n);
    // discordant bond: eta_{k+1} - eta_k = -1 if the left site is occupied
    if left_occupied {
        dh.exp()
    } else {
        (-dh).exp()
    }
}

/// `(N/A) [ e^{H} alpha (1 - eta_1) + e^{-H} (1 - alpha) eta_1 ]`
#[inline]
pub(crate) fn left_flip_rate(
    config: &LatticeConfiguration,
    params: &ReservoirParams,
    h: f64,
) -> f64 {
    let n = config.n_scale() as f64;
    let occ = config.occupied(0);
    let up = if occ { 0.0 } else { h.exp() * params.alpha };
    let down = if occ {
        (-h).exp() * (1.0 - params.alpha)
    } else {
        0.0
    };
    n / params.cap_a * (up + down)
}

#[inline]
pub(crate) fn right_flip_rate(
    config: &LatticeConfiguration,
    params: &ReservoirParams,
    h: f64,
) -> f64 {
    let n = config.n_scale() as f64;
    let occ = config.occupied(config.sites() - 1);
    let up = if occ { 0.0 } else { h.exp() * params.beta };
    let down = if occ {
        (-h).exp() * (1.0 - params.beta)
    } else {
        0.0
    };
    n / params.cap_b * (up + down)
}
