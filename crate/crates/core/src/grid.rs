//! Uniform grids on [0,1] and the quadrature/difference kernels used by the
//! spectral, PDE and rate layers.

use serde::{Deserialize, Serialize};

/// Uniform grid on [0,1] with `m` intervals (`m + 1` nodes). `m` must be even
/// and at least 16 so that composite Simpson weights apply everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    m: usize,
}

impl Grid {
    pub fn new(m: usize) -> Self {
        assert!(
            m >= 16 && m.is_multiple_of(2),
            "grid needs an even m >= 16, got {m}"
        );
        Self { m }
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.m as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.m).map(move |j| self.node(j))
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: *self,
            values: self.nodes().map(f).collect(),
        }
    }
}

/// Values of a function on the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "value count must match grid");
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn integral(&self) -> f64 {
        simpson(&self.values, self.grid.h())
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        simpson(&sq, self.grid.h()).max(0.0).sqrt()
    }

    pub fn gradient(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: gradient(&self.values, self.grid.h()),
        }
    }
}

/// Composite Simpson on a uniform grid; `values.len()` must be odd.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(
        n >= 3 && n % 2 == 1,
        "Simpson needs an odd node count, got {n}"
    );
    let mut s4 = 0.0;
    let mut s2 = 0.0;
    for (j, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if j % 2 == 1 {
            s4 += v;
        } else {
            s2 += v;
        }
    }
    (h / 3.0) * (values[0] + values[n - 1] + 4.0 * s4 + 2.0 * s2)
}

/// Trapezoid rule on nodes with spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 2);
    let mut acc = 0.5 * (values[0] + values[n - 1]);
    for v in &values[1..n - 1] {
        acc += v;
    }
    acc * h
}

/// Trapezoid rule against explicit node positions (non-uniform spacing).
pub fn trapezoid_nonuniform(ts: &[f64], values: &[f64]) -> f64 {
    assert_eq!(ts.len(), values.len());
    let mut acc = 0.0;
    for i in 0..ts.len() - 1 {
        acc += 0.5 * (values[i] + values[i + 1]) * (ts[i + 1] - ts[i]);
    }
    acc
}

/// Prefix integrals `F(x_j) = int_0^{x_j} f` computed with per-interval
/// quadratic interpolation (third-order local; the kink-free analogue of
/// cumulative Simpson). `out[0] = 0`.
pub fn cumulative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3);
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        let seg = if i == 0 {
            h * (5.0 * values[0] + 8.0 * values[1] - values[2]) / 12.0
        } else {
            h * (-values[i - 1] + 8.0 * values[i] + 5.0 * values[i + 1]) / 12.0
        };
        out[i + 1] = out[i] + seg;
    }
    out
}

/// Second-order finite-difference gradient: centered in the interior,
/// one-sided three-point stencils at the end nodes.
pub fn gradient(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3);
    let mut g = vec![0.0; n];
    g[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    for j in 1..n - 1 {
        g[j] = (values[j + 1] - values[j - 1]) / (2.0 * h);
    }
    g[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    g
}

/// Adaptive Simpson to the requested relative tolerance; panics only if the
/// recursion bottoms out, which the smooth integrands used here never hit.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson_panel(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson_panel(f, a, fa, m, fm);
        let (right, rm, frm) = simpson_panel(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 {
            panic!("adaptive Simpson recursion exhausted");
        }
        if delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, eps / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, eps / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson_panel(f, a, fa, b, fb);
    let scale = whole.abs().max(1e-300);
    recurse(f, a, fa, b, fb, whole, m, fm, rel_tol * scale, 60)
}

/// Kahan-compensated running sum; used wherever replica aggregation must be
/// independent of scheduling order.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}
