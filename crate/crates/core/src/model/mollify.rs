//! Smoothing of empirical measures with the compactly supported bump
//! mollifier `phi(r) = Z^{-1} exp(-1/(1-r^2))` on (-1, 1).

use std::sync::LazyLock;

use super::config::EmpiricalMeasure;
use crate::grid::{adaptive_simpson, simpson, Grid, GridFunction};

/// Normalizer `Z = int_{-1}^{1} exp(-1/(1-r^2)) dr`, computed once by
/// adaptive quadrature to relative error 1e-12 and cached.
pub fn bump_normalizer() -> f64 {
    static Z: LazyLock<f64> = LazyLock::new(|| {
        adaptive_simpson(&|r: f64| (-1.0 / (1.0 - r * r)).exp(), -1.0, 1.0, 1e-13)
    });
    *Z
}

/// The mollifier kernel itself (unit mass over (-1,1)).
#[inline]
pub fn bump_kernel(r: f64) -> f64 {
    if r.abs() < 1.0 {
        (-1.0 / (1.0 - r * r)).exp() / bump_normalizer()
    } else {
        0.0
    }
}

/// Default normalizing sequence `U_eps = 1 + eps`, strictly decreasing to 1.
pub fn default_normalizer(epsilon: f64) -> f64 {
    1.0 + epsilon
}

/// Smoothed density `u^{N,eps}(x) = U_eps^{-1} sum_atoms N^{-1}
/// phi^eps(y_atom - x)`.
#[derive(Debug, Clone)]
pub struct SmoothedDensity {
    atoms: Vec<f64>,
    n_scale: usize,
    epsilon: f64,
    u_eps: f64,
}

pub fn empirical_density(measure: &EmpiricalMeasure, epsilon: f64, u_eps: f64) -> SmoothedDensity {
    assert!(epsilon > 0.0, "smoothing radius must be positive");
    assert!(u_eps > 1.0, "normalizer must exceed 1");
    let n = measure.n_scale as f64;
    SmoothedDensity {
        atoms: measure.atom_sites.iter().map(|k| *k as f64 / n).collect(),
        n_scale: measure.n_scale,
        epsilon,
        u_eps,
    }
}

impl SmoothedDensity {
    pub fn eval(&self, x: f64) -> f64 {
        let inv_eps = 1.0 / self.epsilon;
        // atoms are sorted; restrict to the support window
        let lo = self.atoms.partition_point(|y| *y <= x - self.epsilon);
        let mut acc = 0.0;
        for y in &self.atoms[lo..] {
            if *y >= x + self.epsilon {
                break;
            }
            acc += bump_kernel((y - x) * inv_eps);
        }
        acc * inv_eps / (self.n_scale as f64 * self.u_eps)
    }

    pub fn sample(&self, grid: Grid) -> GridFunction {
        grid.sample(|x| self.eval(x))
    }
}

/// The same smoothing map applied to an absolutely continuous density on the
/// grid: `x -> U_eps^{-1} int_0^1 phi^eps(y - x) u(y) dy`. Used to compare
/// particle data and PDE solutions through an identical observable.
pub fn smooth_density_field(u: &GridFunction, epsilon: f64, u_eps: f64) -> GridFunction {
    let h = u.grid.h();
    let inv_eps = 1.0 / epsilon;
    let values = u
        .grid
        .nodes()
        .map(|x| {
            let integrand: Vec<f64> = u
                .grid
                .nodes()
                .zip(&u.values)
                .map(|(y, v)| v * bump_kernel((y - x) * inv_eps) * inv_eps)
                .collect();
            simpson(&integrand, h) / u_eps
        })
        .collect();
    GridFunction::new(u.grid, values)
}
