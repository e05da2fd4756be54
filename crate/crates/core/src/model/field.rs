//! Space-time tilt fields driving the weakly asymmetric dynamics.

use serde::{Deserialize, Serialize};

/// Shape of the external field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FieldKind {
    Zero,
    /// `H(t,x) = slope * x`, time-independent.
    Affine {
        slope: f64,
    },
    /// `H(t,x) = amplitude * sin(mode * pi * x) * min(t/ramp, 1)`.
    Sine {
        amplitude: f64,
        mode: u32,
        ramp: f64,
    },
    /// Bilinear interpolation of a table on uniform time and space grids.
    Tabulated {
        t_final: f64,
        times: usize,
        cells: usize,
        values: Vec<f64>,
    },
}

/// An evaluable field `H(t, x)` with its space gradient, time derivative and
/// declared sup-norm bounds. The bounds feed the dominating rates of the
/// thinned simulation, so the simulator re-checks them on a sample grid and
/// rejects a field whose metadata under-reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltField {
    pub kind: FieldKind,
    pub sup_value: f64,
    pub sup_gradient: f64,
}

impl TiltField {
    pub fn zero() -> Self {
        Self {
            kind: FieldKind::Zero,
            sup_value: 0.0,
            sup_gradient: 0.0,
        }
    }

    pub fn affine(slope: f64) -> Self {
        Self {
            kind: FieldKind::Affine { slope },
            sup_value: slope.abs(),
            sup_gradient: slope.abs(),
        }
    }

    pub fn sine(amplitude: f64, mode: u32, ramp: f64) -> Self {
        assert!(mode >= 1 && ramp > 0.0);
        Self {
            kind: FieldKind::Sine {
                amplitude,
                mode,
                ramp,
            },
            sup_value: amplitude.abs(),
            sup_gradient: amplitude.abs() * mode as f64 * std::f64::consts::PI,
        }
    }

    /// Table on a uniform (times x cells+1) grid over [0, t_final] x [0, 1];
    /// sup bounds are computed from the table itself.
    pub fn tabulated(t_final: f64, times: usize, cells: usize, values: Vec<f64>) -> Self {
        assert!(times >= 2 && cells >= 1 && t_final > 0.0);
        assert_eq!(values.len(), times * (cells + 1));
        let sup_value = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let hx = 1.0 / cells as f64;
        let mut sup_gradient = 0.0_f64;
        for row in values.chunks(cells + 1) {
            for w in row.windows(2) {
                sup_gradient = sup_gradient.max(((w[1] - w[0]) / hx).abs());
            }
        }
        Self {
            kind: FieldKind::Tabulated {
                t_final,
                times,
                cells,
                values,
            },
            sup_value,
            sup_gradient,
        }
    }

    /// Same field with caller-declared bounds; exists so the simulator's
    /// metadata check is reachable.
    pub fn with_declared_bounds(kind: FieldKind, sup_value: f64, sup_gradient: f64) -> Self {
        Self {
            kind,
            sup_value,
            sup_gradient,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, FieldKind::Zero)
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        match &self.kind {
            FieldKind::Zero => 0.0,
            FieldKind::Affine { slope } => slope * x,
            FieldKind::Sine {
                amplitude,
                mode,
                ramp,
            } => {
                amplitude * (*mode as f64 * std::f64::consts::PI * x).sin() * ramp_factor(t, *ramp)
            }
            FieldKind::Tabulated {
                t_final,
                times,
                cells,
                values,
            } => bilinear(values, *t_final, *times, *cells, t, x),
        }
    }

    pub fn gradient(&self, t: f64, x: f64) -> f64 {
        match &self.kind {
            FieldKind::Zero => 0.0,
            FieldKind::Affine { slope } => *slope,
            FieldKind::Sine {
                amplitude,
                mode,
                ramp,
            } => {
                let k = *mode as f64 * std::f64::consts::PI;
                amplitude * k * (k * x).cos() * ramp_factor(t, *ramp)
            }
            FieldKind::Tabulated {
                t_final,
                times,
                cells,
                values,
            } => {
                // central difference of the interpolant
                let hx = 0.5 / *cells as f64;
                let (lo, hi) = ((x - hx).max(0.0), (x + hx).min(1.0));
                (bilinear(values, *t_final, *times, *cells, t, hi)
                    - bilinear(values, *t_final, *times, *cells, t, lo))
                    / (hi - lo)
            }
        }
    }

    pub fn time_derivative(&self, t: f64, x: f64) -> f64 {
        match &self.kind {
            FieldKind::Zero | FieldKind::Affine { .. } => 0.0,
            FieldKind::Sine {
                amplitude,
                mode,
                ramp,
            } => {
                let s = amplitude * (*mode as f64 * std::f64::consts::PI * x).sin();
                if t < *ramp {
                    s / ramp
                } else {
                    0.0
                }
            }
            FieldKind::Tabulated {
                t_final,
                times,
                cells,
                values,
            } => {
                let ht = 0.5 * t_final / (*times - 1) as f64;
                let (lo, hi) = ((t - ht).max(0.0), (t + ht).min(*t_final));
                (bilinear(values, *t_final, *times, *cells, hi, x)
                    - bilinear(values, *t_final, *times, *cells, lo, x))
                    / (hi - lo)
            }
        }
    }

    /// Checks the declared sup bounds against sampled values; returns the
    /// worst offender if the metadata under-reports.
    pub fn check_bounds(&self, t_final: f64) -> Result<(), FieldBoundsViolation> {
        let slack = 1e-9;
        for it in 0..=64 {
            let t = t_final * it as f64 / 64.0;
            for jx in 0..=256 {
                let x = jx as f64 / 256.0;
                let v = self.value(t, x).abs();
                if v > self.sup_value * (1.0 + slack) + slack {
                    return Err(FieldBoundsViolation {
                        quantity: "value",
                        at: (t, x),
                        observed: v,
                        declared: self.sup_value,
                    });
                }
                let g = self.gradient(t, x).abs();
                if g > self.sup_gradient * (1.0 + slack) + slack {
                    return Err(FieldBoundsViolation {
                        quantity: "gradient",
                        at: (t, x),
                        observed: g,
                        declared: self.sup_gradient,
                    });
                }
            }
        }
        Ok(())
    }

    /// Short identifier for manifests.
    pub fn id(&self) -> String {
        match &self.kind {
            FieldKind::Zero => "zero".into(),
            FieldKind::Affine { slope } => format!("affine(slope={slope})"),
            FieldKind::Sine {
                amplitude,
                mode,
                ramp,
            } => {
                format!("sine(amplitude={amplitude},mode={mode},ramp={ramp})")
            }
            FieldKind::Tabulated { times, cells, .. } => {
                format!("tabulated({times}x{})", cells + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldBoundsViolation {
    pub quantity: &'static str,
    pub at: (f64, f64),
    pub observed: f64,
    pub declared: f64,
}

#[inline]
fn ramp_factor(t: f64, ramp: f64) -> f64 {
    (t / ramp).min(1.0)
}

fn bilinear(values: &[f64], t_final: f64, times: usize, cells: usize, t: f64, x: f64) -> f64 {
    let dt = t_final / (times - 1) as f64;
    let hx = 1.0 / cells as f64;
    let ti = ((t / dt).floor() as usize).min(times - 2);
    let xi = ((x / hx).floor() as usize).min(cells - 1);
    let ft = ((t - ti as f64 * dt) / dt).clamp(0.0, 1.0);
    let fx = ((x - xi as f64 * hx) / hx).clamp(0.0, 1.0);
    let w = cells + 1;
    let v00 = values[ti * w + xi];
    let v01 = values[ti * w + xi + 1];
    let v10 = values[(ti + 1) * w + xi];
    let v11 = values[(ti + 1) * w + xi + 1];
    v00 * (1.0 - ft) * (1.0 - fx) + v01 * (1.0 - ft) * fx + v10 * ft * (1.0 - fx) + v11 * ft * fx
}
