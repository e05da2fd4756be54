//! Property-level checks of the spectral toolkit beyond the unit tests:
//! Parseval saturation, semigroup smoothing rates, and the pointwise series
//! bound.

use robin_sep_core::grid::{simpson, Grid};
use robin_sep_core::params::ReservoirParams;
use robin_sep_core::spectral::{hr_norm_sq, solve_eigenvalues, BoundaryFlavor, SpectralBasis};

fn params() -> ReservoirParams {
    ReservoirParams::new(0.2, 0.8, 1.0, 1.0).unwrap()
}

fn coefficients(basis: &SpectralBasis, f: &robin_sep_core::grid::GridFunction) -> Vec<f64> {
    let h = f.grid.h();
    (1..=basis.truncation)
        .map(|k| {
            let integrand: Vec<f64> = f
                .grid
                .nodes()
                .zip(&f.values)
                .map(|(x, v)| v * basis.eigenfunction(k, x).unwrap())
                .collect();
            simpson(&integrand, h)
        })
        .collect()
}

#[test]
fn parseval_saturates_for_bandlimited_functions() {
    let p = params();
    let basis = solve_eigenvalues(&p, 64).unwrap();
    let grid = Grid::new(2048);
    // bandlimited: a combination of the first 12 eigenfunctions
    let f = grid.sample(|x| {
        (1..=12)
            .map(|k| basis.eigenfunction(k, x).unwrap() / k as f64)
            .sum::<f64>()
    });
    let norm_sq = {
        let sq: Vec<f64> = f.values.iter().map(|v| v * v).collect();
        simpson(&sq, grid.h())
    };
    let coef = coefficients(&basis, &f);
    let mut running = 0.0;
    let mut gaps = Vec::new();
    for (k, c) in coef.iter().enumerate() {
        running += c * c;
        if [3, 7, 11, 63].contains(&k) {
            gaps.push(norm_sq - running);
        }
    }
    // Bessel at every truncation, saturation once the band is covered
    assert!(gaps.iter().all(|g| *g > -1e-9), "{gaps:?}");
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(gaps.last().unwrap().abs() < 1e-8, "gap {:?}", gaps.last());
}

fn fit_slope(ts: &[f64], errs: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

#[test]
fn semigroup_smoothing_rates() {
    // || P_t f - f ||_2 <= C t^{1/3} ||f||_HR and the sup-norm analogue with
    // t^{1/5}: decay must be monotone with fitted exponent at least 1/3
    // (resp. 1/5). The sample is rough (a kink) but has finite reservoir
    // norm.
    let p = params();
    let basis = solve_eigenvalues(&p, 128).unwrap();
    let grid = Grid::new(2048);
    let f = grid.sample(|x| 0.5 - (x - 0.4).abs().powf(0.6));
    let hr = hr_norm_sq(&p, &f).sqrt();
    assert!(hr.is_finite() && hr > 0.0);
    let ts = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2];
    let mut l2_errs = Vec::new();
    let mut sup_errs = Vec::new();
    for t in ts {
        let out = basis.semigroup_apply(t, &f, BoundaryFlavor::Robin);
        let diff: Vec<f64> = out
            .values
            .values
            .iter()
            .zip(&f.values)
            .map(|(a, b)| (a - b).abs())
            .collect();
        let sq: Vec<f64> = diff.iter().map(|d| d * d).collect();
        l2_errs.push(simpson(&sq, grid.h()).sqrt());
        sup_errs.push(diff.iter().cloned().fold(0.0_f64, f64::max));
    }
    assert!(
        l2_errs.windows(2).all(|w| w[1] >= w[0] - 1e-12),
        "not monotone: {l2_errs:?}"
    );
    assert!(
        sup_errs.windows(2).all(|w| w[1] >= w[0] - 1e-12),
        "not monotone: {sup_errs:?}"
    );
    let l2_slope = fit_slope(&ts, &l2_errs);
    let sup_slope = fit_slope(&ts, &sup_errs);
    assert!(l2_slope >= 1.0 / 3.0 - 0.02, "L2 exponent {l2_slope}");
    assert!(sup_slope >= 1.0 / 5.0 - 0.02, "sup exponent {sup_slope}");
}

#[test]
fn pointwise_series_bound_by_cauchy_schwarz() {
    // sum_k |<f, f_k>| is finite and dominated by
    // sqrt(sum lambda_k c_k^2 * sum 1/lambda_k)
    let p = params();
    let basis = solve_eigenvalues(&p, 128).unwrap();
    let grid = Grid::new(2048);
    for f in [
        grid.sample(|x| 0.4 + 0.3 * (2.0 * x).sin()),
        grid.sample(|x| x * x - 0.2 * x + 0.1),
        grid.sample(|x| 0.5 - (x - 0.4).abs().powf(0.7)),
    ] {
        let coef = coefficients(&basis, &f);
        let abs_sum: f64 = coef.iter().map(|c| c.abs()).sum();
        let weighted: f64 = coef
            .iter()
            .zip(&basis.eigenvalues)
            .map(|(c, l)| l * c * c)
            .sum();
        let inv_sum: f64 = basis.eigenvalues.iter().map(|l| 1.0 / l).sum();
        assert!(abs_sum.is_finite());
        assert!(
            abs_sum <= (weighted * inv_sum).sqrt() + 1e-12,
            "{abs_sum} vs {}",
            (weighted * inv_sum).sqrt()
        );
    }
}
