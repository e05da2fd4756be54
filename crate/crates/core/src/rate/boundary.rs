//! The boundary-cost algebra: the four closed forms tying reservoir density
//! `rho`, coupling `D`, boundary trace `a` and field value `M` together.
//!
//! Identities (exact): `p = d/dM b`, `c = M p - b`, `q = b - M (rho - a)/D`,
//! `q >= 0` with equality at `M = 0`.

/// `b = D^{-1} { (1-a) rho (e^M - 1) + a (1-rho) (e^{-M} - 1) }`
#[inline]
pub fn boundary_b(rho: f64, d: f64, a: f64, m: f64) -> f64 {
    ((1.0 - a) * rho * m.exp_m1() + a * (1.0 - rho) * (-m).exp_m1()) / d
}

/// `p = d/dM b = D^{-1} { (1-a) rho e^M - a (1-rho) e^{-M} }`
#[inline]
pub fn boundary_p(rho: f64, d: f64, a: f64, m: f64) -> f64 {
    ((1.0 - a) * rho * m.exp() - a * (1.0 - rho) * (-m).exp()) / d
}

/// `d/dM p`, strictly positive: the monotonicity that makes every boundary
/// Newton solve well posed.
#[inline]
pub fn boundary_p_dm(rho: f64, d: f64, a: f64, m: f64) -> f64 {
    ((1.0 - a) * rho * m.exp() + a * (1.0 - rho) * (-m).exp()) / d
}

/// `d/da p`, strictly negative.
#[inline]
pub fn boundary_p_da(rho: f64, d: f64, _a: f64, m: f64) -> f64 {
    (-rho * m.exp() - (1.0 - rho) * (-m).exp()) / d
}

/// `c = D^{-1} { (1-a) rho (1 - e^M + M e^M) + a (1-rho) (1 - e^{-M} - M e^{-M}) }`
#[inline]
pub fn boundary_c(rho: f64, d: f64, a: f64, m: f64) -> f64 {
    ((1.0 - a) * rho * (1.0 - m.exp() + m * m.exp())
        + a * (1.0 - rho) * (1.0 - (-m).exp() - m * (-m).exp()))
        / d
}

/// `q = D^{-1} { (1-a) rho (e^M - M - 1) + a (1-rho) (e^{-M} + M - 1) }`
#[inline]
pub fn boundary_q(rho: f64, d: f64, a: f64, m: f64) -> f64 {
    ((1.0 - a) * rho * (m.exp() - m - 1.0) + a * (1.0 - rho) * ((-m).exp() + m - 1.0)) / d
}
