//! Variational evaluation of the rate functional: maximize the concave map
//! `H -> J_{T,H}(u)` over a finite tensor basis of time hat functions and
//! space modes `{1, x, cos(k pi x)}`.
//!
//! The constant and affine space modes are mandatory because the maximizer
//! need not vanish at the boundary. The linear part and the mobility-weighted
//! quadratic form are assembled once on the path's grids (the quadratic form
//! is block tridiagonal across hat functions); only the boundary cost stays
//! nonlinear, so one ascent iteration costs O(L) after assembly. The ascent
//! is conjugate-gradient-accelerated with an exact concave line search and is
//! monotone by construction.

use super::boundary::{boundary_b, boundary_p, boundary_p_dm};
use super::RateError;
use crate::grid::simpson;
use crate::mobility;
use crate::params::ReservoirParams;
use crate::pde::DensityPath;

/// Tensor basis: hat functions on a subset of the path's time nodes times
/// `{1, x, cos(k pi x) : k <= space_modes}`.
#[derive(Debug, Clone)]
pub struct FieldBasis {
    /// Indices into the path's time grid carrying the hat nodes; first is 0,
    /// last is the final time index.
    pub time_nodes: Vec<usize>,
    pub space_modes: usize,
}

impl FieldBasis {
    /// `n_hats` hat functions snapped onto the path's time grid.
    pub fn uniform(path: &DensityPath, n_hats: usize, space_modes: usize) -> Self {
        assert!(n_hats >= 2 && n_hats <= path.times.len());
        let l = path.steps();
        let mut nodes: Vec<usize> = (0..n_hats)
            .map(|a| ((a * l) as f64 / (n_hats - 1) as f64).round() as usize)
            .collect();
        nodes.dedup();
        Self {
            time_nodes: nodes,
            space_modes,
        }
    }

    pub fn n_hats(&self) -> usize {
        self.time_nodes.len()
    }

    pub fn space_dim(&self) -> usize {
        self.space_modes + 2
    }

    pub fn dim(&self) -> usize {
        self.n_hats() * self.space_dim()
    }

    fn mode_values(&self, x: f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.space_dim());
        v.push(1.0);
        v.push(x);
        for k in 1..=self.space_modes {
            v.push((k as f64 * std::f64::consts::PI * x).cos());
        }
        v
    }

    fn mode_gradients(&self, x: f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.space_dim());
        v.push(0.0);
        v.push(1.0);
        for k in 1..=self.space_modes {
            let s = k as f64 * std::f64::consts::PI;
            v.push(-s * (s * x).sin());
        }
        v
    }
}

/// Monotone record of the objective along the ascent.
#[derive(Debug, Clone, Default)]
pub struct AscentTrace {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct VariationalResult {
    pub value: f64,
    pub coefficients: Vec<f64>,
    pub trace: AscentTrace,
    pub iterations: usize,
    pub gradient_norm: f64,
}

struct Assembled {
    dim: usize,
    s_dim: usize,
    n_hats: usize,
    linear: Vec<f64>,
    /// dense-time tables for the boundary cost
    weights: Vec<f64>,
    seg: Vec<usize>,
    tau_left: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    s0: Vec<f64>,
    s1: Vec<f64>,
    diag_blocks: Vec<f64>,
    off_blocks: Vec<f64>,
    alpha: f64,
    cap_a: f64,
    beta: f64,
    cap_b: f64,
}

impl Assembled {
    fn quad_apply(&self, c: &[f64], out: &mut [f64]) {
        let s = self.s_dim;
        out.iter_mut().for_each(|o| *o = 0.0);
        for a in 0..self.n_hats {
            let d = &self.diag_blocks[a * s * s..(a + 1) * s * s];
            for i in 0..s {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += d[i * s + j] * c[a * s + j];
                }
                out[a * s + i] += acc;
            }
            if a + 1 < self.n_hats {
                let o = &self.off_blocks[a * s * s..(a + 1) * s * s];
                for i in 0..s {
                    let mut acc_r = 0.0;
                    let mut acc_l = 0.0;
                    for j in 0..s {
                        acc_r += o[i * s + j] * c[(a + 1) * s + j];
                        acc_l += o[j * s + i] * c[a * s + j];
                    }
                    out[a * s + i] += acc_r;
                    out[(a + 1) * s + i] += acc_l;
                }
            }
        }
    }

    fn quad_form(&self, c: &[f64], d: &[f64]) -> f64 {
        let mut qd = vec![0.0; self.dim];
        self.quad_apply(d, &mut qd);
        c.iter().zip(&qd).map(|(a, b)| a * b).sum()
    }

    /// Boundary traces `H(t_i, 0)` and `H(t_i, 1)` of the field with
    /// coefficients `c` at every dense time node.
    fn boundary_traces(&self, c: &[f64], h0: &mut [f64], h1: &mut [f64]) {
        let s = self.s_dim;
        let n = self.weights.len();
        let mut c0 = vec![0.0; self.n_hats];
        let mut c1 = vec![0.0; self.n_hats];
        for a in 0..self.n_hats {
            let mut x0 = 0.0;
            let mut x1 = 0.0;
            for b in 0..s {
                x0 += c[a * s + b] * self.s0[b];
                x1 += c[a * s + b] * self.s1[b];
            }
            c0[a] = x0;
            c1[a] = x1;
        }
        for i in 0..n {
            let a = self.seg[i];
            let tl = self.tau_left[i];
            h0[i] = tl * c0[a] + (1.0 - tl) * c0[a + 1];
            h1[i] = tl * c1[a] + (1.0 - tl) * c1[a + 1];
        }
    }

    fn boundary_cost(&self, h0: &[f64], h1: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.weights.len() {
            acc += self.weights[i]
                * (boundary_b(self.alpha, self.cap_a, self.u0[i], h0[i])
                    + boundary_b(self.beta, self.cap_b, self.u1[i], h1[i]));
        }
        acc
    }

    fn objective(&self, c: &[f64], scratch: &mut Scratch) -> f64 {
        self.boundary_traces(c, &mut scratch.h0, &mut scratch.h1);
        let lin: f64 = self.linear.iter().zip(c).map(|(a, b)| a * b).sum();
        lin - self.quad_form(c, c) - self.boundary_cost(&scratch.h0, &scratch.h1)
    }

    fn gradient(&self, c: &[f64], scratch: &mut Scratch, out: &mut [f64]) {
        self.boundary_traces(c, &mut scratch.h0, &mut scratch.h1);
        self.quad_apply(c, &mut scratch.qc);
        let s = self.s_dim;
        let mut p_left = vec![0.0; self.n_hats];
        let mut p_right = vec![0.0; self.n_hats];
        for i in 0..self.weights.len() {
            let a = self.seg[i];
            let tl = self.tau_left[i];
            let pl =
                self.weights[i] * boundary_p(self.alpha, self.cap_a, self.u0[i], scratch.h0[i]);
            let pr = self.weights[i] * boundary_p(self.beta, self.cap_b, self.u1[i], scratch.h1[i]);
            p_left[a] += tl * pl;
            p_left[a + 1] += (1.0 - tl) * pl;
            p_right[a] += tl * pr;
            p_right[a + 1] += (1.0 - tl) * pr;
        }
        for a in 0..self.n_hats {
            for b in 0..s {
                out[a * s + b] = self.linear[a * s + b]
                    - 2.0 * scratch.qc[a * s + b]
                    - p_left[a] * self.s0[b]
                    - p_right[a] * self.s1[b];
            }
        }
    }
}

struct Scratch {
    h0: Vec<f64>,
    h1: Vec<f64>,
    qc: Vec<f64>,
}

fn assemble(u: &DensityPath, params: &ReservoirParams, basis: &FieldBasis) -> Assembled {
    let grid = u.grid;
    let h = grid.h();
    let w = grid.len();
    let l = u.steps();
    let s_dim = basis.space_dim();
    let n_hats = basis.n_hats();
    let dim = basis.dim();

    // space-mode tables on the grid
    let modes: Vec<Vec<f64>> = (0..w).map(|j| basis.mode_values(grid.node(j))).collect();
    let dmodes: Vec<Vec<f64>> = (0..w).map(|j| basis.mode_gradients(grid.node(j))).collect();

    // dense-time trapezoid weights
    let weights: Vec<f64> = (0..=l)
        .map(|i| {
            let lo = if i == 0 { u.times[0] } else { u.times[i - 1] };
            let hi = if i == l { u.times[l] } else { u.times[i + 1] };
            0.5 * (hi - lo)
        })
        .collect();

    // hat segment of each dense node and the left hat weight
    let nodes = &basis.time_nodes;
    let mut seg = vec![0usize; l + 1];
    let mut tau_left = vec![0.0; l + 1];
    {
        let mut a = 0usize;
        for i in 0..=l {
            while a + 2 < nodes.len() && i >= nodes[a + 1] {
                a += 1;
            }
            let (i0, i1) = (nodes[a], nodes[a + 1]);
            let span = u.times[i1] - u.times[i0];
            seg[i] = a;
            tau_left[i] = ((u.times[i1] - u.times[i]) / span).clamp(0.0, 1.0);
        }
    }

    // per dense time: <u, S_b>, <grad u, grad S_b>, and the mobility Gram
    let mut u_pair = vec![0.0; (l + 1) * s_dim];
    let mut g_pair = vec![0.0; (l + 1) * s_dim];
    let mut gram = vec![0.0; (l + 1) * s_dim * s_dim];
    let mut scratch_col = vec![0.0; w];
    for i in 0..=l {
        let ut = u.slice(i);
        let du = u.space_gradient(i);
        for b in 0..s_dim {
            for j in 0..w {
                scratch_col[j] = ut[j] * modes[j][b];
            }
            u_pair[i * s_dim + b] = simpson(&scratch_col, h);
            for j in 0..w {
                scratch_col[j] = du[j] * dmodes[j][b];
            }
            g_pair[i * s_dim + b] = simpson(&scratch_col, h);
        }
        for b in 0..s_dim {
            for c in b..s_dim {
                for j in 0..w {
                    scratch_col[j] = mobility(ut[j]) * dmodes[j][b] * dmodes[j][c];
                }
                let v = simpson(&scratch_col, h);
                gram[(i * s_dim + b) * s_dim + c] = v;
                gram[(i * s_dim + c) * s_dim + b] = v;
            }
        }
    }

    // linear part: end pairings, -<u, dt H> (exact for hats), +<grad u, grad H>
    let mut linear = vec![0.0; dim];
    for b in 0..s_dim {
        // tau_a(T) = 1 only for the last hat, tau_a(0) = 1 only for the first
        linear[(n_hats - 1) * s_dim + b] += u_pair[l * s_dim + b];
        linear[b] -= u_pair[b];
    }
    for i in 0..l {
        let a = seg[i];
        let (i0, i1) = (nodes[a], nodes[a + 1]);
        let span = u.times[i1] - u.times[i0];
        let dt = u.times[i + 1] - u.times[i];
        for b in 0..s_dim {
            let avg_u = 0.5 * (u_pair[i * s_dim + b] + u_pair[(i + 1) * s_dim + b]);
            // d/dt tau_a = -1/span, d/dt tau_{a+1} = +1/span on this segment
            linear[a * s_dim + b] += dt * avg_u / span;
            linear[(a + 1) * s_dim + b] -= dt * avg_u / span;
        }
    }
    for i in 0..=l {
        let a = seg[i];
        let tl = tau_left[i];
        for b in 0..s_dim {
            linear[a * s_dim + b] += weights[i] * tl * g_pair[i * s_dim + b];
            linear[(a + 1) * s_dim + b] += weights[i] * (1.0 - tl) * g_pair[i * s_dim + b];
        }
    }

    // block-tridiagonal quadratic form
    let mut diag_blocks = vec![0.0; n_hats * s_dim * s_dim];
    let mut off_blocks = vec![0.0; (n_hats - 1) * s_dim * s_dim];
    for i in 0..=l {
        let a = seg[i];
        let tl = tau_left[i];
        let tr = 1.0 - tl;
        let wi = weights[i];
        let g = &gram[i * s_dim * s_dim..(i + 1) * s_dim * s_dim];
        for b in 0..s_dim {
            for c in 0..s_dim {
                let v = wi * g[b * s_dim + c];
                diag_blocks[(a * s_dim + b) * s_dim + c] += tl * tl * v;
                diag_blocks[((a + 1) * s_dim + b) * s_dim + c] += tr * tr * v;
                off_blocks[(a * s_dim + b) * s_dim + c] += tl * tr * v;
            }
        }
    }

    let u0: Vec<f64> = (0..=l).map(|i| u.traces(i).0).collect();
    let u1: Vec<f64> = (0..=l).map(|i| u.traces(i).1).collect();
    Assembled {
        dim,
        s_dim,
        n_hats,
        linear,
        weights,
        seg,
        tau_left,
        u0,
        u1,
        s0: basis.mode_values(0.0),
        s1: basis.mode_values(1.0),
        diag_blocks,
        off_blocks,
        alpha: params.alpha,
        cap_a: params.cap_a,
        beta: params.beta,
        cap_b: params.cap_b,
    }
}

const MAX_ITERATIONS: usize = 20_000;

pub fn rate_variational(
    u: &DensityPath,
    params: &ReservoirParams,
    basis: &FieldBasis,
) -> Result<VariationalResult, RateError> {
    let asm = assemble(u, params, basis);
    let dim = asm.dim;
    let n = asm.weights.len();
    let mut scratch = Scratch {
        h0: vec![0.0; n],
        h1: vec![0.0; n],
        qc: vec![0.0; dim],
    };

    let mut c = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut grad_prev = vec![0.0; dim];
    let mut dir = vec![0.0; dim];
    asm.gradient(&c, &mut scratch, &mut grad);
    dir.copy_from_slice(&grad);
    let mut value = asm.objective(&c, &mut scratch);
    let mut trace = AscentTrace {
        values: vec![value],
    };
    let mut stall = 0usize;
    let mut iterations = 0usize;

    // direction boundary traces, reused by the line search
    let mut e0 = vec![0.0; n];
    let mut e1 = vec![0.0; n];

    for it in 0..MAX_ITERATIONS {
        iterations = it + 1;
        let g_dot_d: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
        if g_dot_d <= 0.0 {
            dir.copy_from_slice(&grad);
        }
        let gnorm = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        if gnorm < 1e-12 {
            break;
        }

        // exact concave line search along dir
        asm.boundary_traces(&dir, &mut e0, &mut e1);
        let l_dot_d: f64 = asm.linear.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let c_q_d = asm.quad_form(&c, &dir);
        let d_q_d = asm.quad_form(&dir, &dir);
        asm.boundary_traces(&c, &mut scratch.h0, &mut scratch.h1);
        let phi_prime = |s: f64, asmr: &Assembled, scr: &Scratch| -> (f64, f64) {
            let mut bp = 0.0;
            let mut bpp = 0.0;
            for i in 0..n {
                let x0 = scr.h0[i] + s * e0[i];
                let x1 = scr.h1[i] + s * e1[i];
                bp += asmr.weights[i]
                    * (boundary_p(asmr.alpha, asmr.cap_a, asmr.u0[i], x0) * e0[i]
                        + boundary_p(asmr.beta, asmr.cap_b, asmr.u1[i], x1) * e1[i]);
                bpp += asmr.weights[i]
                    * (boundary_p_dm(asmr.alpha, asmr.cap_a, asmr.u0[i], x0) * e0[i] * e0[i]
                        + boundary_p_dm(asmr.beta, asmr.cap_b, asmr.u1[i], x1) * e1[i] * e1[i]);
            }
            (
                l_dot_d - 2.0 * c_q_d - 2.0 * s * d_q_d - bp,
                -2.0 * d_q_d - bpp,
            )
        };
        let mut s = 0.0_f64;
        for _ in 0..60 {
            let (d1, d2) = phi_prime(s, &asm, &scratch);
            if d1.abs() < 1e-15 * (1.0 + value.abs()) || d2 >= 0.0 {
                break;
            }
            let step = d1 / d2;
            s -= step;
            if step.abs() < 1e-16 * (1.0 + s.abs()) {
                break;
            }
        }
        if !(s.is_finite() && s > 0.0) {
            // gradient direction fallback with shrinking trial steps
            s = 1e-8;
        }
        let mut trial: Vec<f64> = c.iter().zip(&dir).map(|(a, d)| a + s * d).collect();
        let mut trial_value = asm.objective(&trial, &mut scratch);
        let mut backtrack = 0;
        while trial_value < value && backtrack < 60 {
            s *= 0.5;
            trial = c.iter().zip(&dir).map(|(a, d)| a + s * d).collect();
            trial_value = asm.objective(&trial, &mut scratch);
            backtrack += 1;
        }
        if trial_value < value {
            return Err(RateError::NonMonotoneAscent {
                iteration: it,
                from: value,
                to: trial_value,
            });
        }
        let gain = trial_value - value;
        c = trial;
        value = trial_value;
        trace.values.push(value);
        if gain <= 1e-15 * (1.0 + value.abs()) {
            stall += 1;
            if stall >= 4 {
                break;
            }
        } else {
            stall = 0;
        }

        grad_prev.copy_from_slice(&grad);
        asm.gradient(&c, &mut scratch, &mut grad);
        // Polak-Ribiere with restart
        let gg_prev: f64 = grad_prev.iter().map(|g| g * g).sum();
        let num: f64 = grad.iter().zip(&grad_prev).map(|(g, p)| g * (g - p)).sum();
        let beta = if gg_prev > 0.0 {
            (num / gg_prev).max(0.0)
        } else {
            0.0
        };
        let restart = (it + 1) % dim.max(16) == 0;
        for k in 0..dim {
            dir[k] = grad[k] + if restart { 0.0 } else { beta * dir[k] };
        }
    }

    let gradient_norm = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    Ok(VariationalResult {
        value,
        coefficients: c,
        trace,
        iterations,
        gradient_norm,
    })
}
