//! Space-time density paths on uniform grids.

use crate::grid::{gradient, Grid};

/// Density `u(t, x)` on a uniform time grid `0 = t_0 < ... < t_L = T` and a
/// uniform space [`Grid`]. Values are stored row-major in time.
#[derive(Debug, Clone)]
pub struct DensityPath {
    pub times: Vec<f64>,
    pub grid: Grid,
    values: Vec<f64>,
}

impl DensityPath {
    pub fn new(times: Vec<f64>, grid: Grid, values: Vec<f64>) -> Self {
        assert!(times.len() >= 2);
        assert_eq!(values.len(), times.len() * grid.len());
        assert!(times.windows(2).all(|w| w[1] > w[0]), "times must increase");
        Self {
            times,
            grid,
            values,
        }
    }

    /// Constant-in-time path (the degenerate but valid case of a stationary
    /// initial profile).
    pub fn constant(times: Vec<f64>, grid: Grid, profile: &[f64]) -> Self {
        assert_eq!(profile.len(), grid.len());
        let values = times.iter().flat_map(|_| profile.iter().copied()).collect();
        Self::new(times, grid, values)
    }

    #[inline]
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    #[inline]
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    #[inline]
    pub fn slice(&self, i: usize) -> &[f64] {
        let w = self.grid.len();
        &self.values[i * w..(i + 1) * w]
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.len() + j]
    }

    /// Boundary traces at time index `i`: the outermost nodal values.
    pub fn traces(&self, i: usize) -> (f64, f64) {
        let s = self.slice(i);
        (s[0], s[s.len() - 1])
    }

    /// Space gradient of the slice at time index `i` (centered interior,
    /// one-sided second order at the ends).
    pub fn space_gradient(&self, i: usize) -> Vec<f64> {
        gradient(self.slice(i), self.grid.h())
    }

    /// Time derivative of the slice at time index `i` (centered interior,
    /// one-sided second order at the endpoints). Assumes a uniform time grid.
    pub fn time_derivative(&self, i: usize) -> Vec<f64> {
        let l = self.steps();
        let dt = self.times[1] - self.times[0];
        let w = self.grid.len();
        let mut out = vec![0.0; w];
        if i == 0 {
            let (a, b, c) = (self.slice(0), self.slice(1), self.slice(2));
            for j in 0..w {
                out[j] = (-3.0 * a[j] + 4.0 * b[j] - c[j]) / (2.0 * dt);
            }
        } else if i == l {
            let (a, b, c) = (self.slice(l), self.slice(l - 1), self.slice(l - 2));
            for j in 0..w {
                out[j] = (3.0 * a[j] - 4.0 * b[j] + c[j]) / (2.0 * dt);
            }
        } else {
            let (a, b) = (self.slice(i - 1), self.slice(i + 1));
            for j in 0..w {
                out[j] = (b[j] - a[j]) / (2.0 * dt);
            }
        }
        out
    }

    /// Nodewise extrema over the whole path.
    pub fn bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in &self.values {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        (lo, hi)
    }

    /// Restriction to the time window `[times[i0], times[i1]]`, with times
    /// shifted so the window starts at zero (the time-shift map).
    pub fn window(&self, i0: usize, i1: usize) -> DensityPath {
        assert!(i0 < i1 && i1 <= self.steps());
        let t0 = self.times[i0];
        let times = self.times[i0..=i1].iter().map(|t| t - t0).collect();
        let w = self.grid.len();
        let values = self.values[i0 * w..(i1 + 1) * w].to_vec();
        DensityPath::new(times, self.grid, values)
    }

    pub fn values_flat(&self) -> &[f64] {
        &self.values
    }

    /// Time mollification with the compact bump kernel at radius `delta`,
    /// extending the path constantly beyond `[0, T]`. Discrete weights are
    /// renormalized so constants pass through exactly. Rate recovery wants
    /// paths smooth in time; this supplies the smoothing for rough inputs.
    pub fn mollified_in_time(&self, delta: f64) -> DensityPath {
        assert!(delta > 0.0);
        let l = self.steps();
        let dt = self.times[1] - self.times[0];
        let w = self.grid.len();
        let reach = (delta / dt).ceil() as i64;
        let mut values = vec![0.0; (l + 1) * w];
        for i in 0..=(l as i64) {
            let mut weights = Vec::with_capacity((2 * reach + 1) as usize);
            let mut total = 0.0;
            for k in -reach..=reach {
                let r = k as f64 * dt / delta;
                let wgt = crate::model::bump_kernel(r);
                weights.push(wgt);
                total += wgt;
            }
            for (idx, k) in (-reach..=reach).enumerate() {
                let src = (i + k).clamp(0, l as i64) as usize;
                let wgt = weights[idx] / total;
                if wgt == 0.0 {
                    continue;
                }
                let row = self.slice(src);
                for j in 0..w {
                    values[i as usize * w + j] += wgt * row[j];
                }
            }
        }
        DensityPath::new(self.times.clone(), self.grid, values)
    }
}
