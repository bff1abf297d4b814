use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::chebyshev::{chebyshev_to_polynomial, chebyshev_values, unit_map};
use super::{ApproxRange, Polynomial, WeightScheme};
use crate::error::{Error, Result};

/// Relative singular-value floor below which a fit is rejected.
const RCOND: f64 = 1e-13;

/// Default number of fitting samples for a given degree.
pub fn default_samples(degree: usize) -> usize {
    200 * (degree + 1)
}

/// `n` evenly spaced points covering `[lo, hi]` including both ends.
pub fn uniform_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Weighted least squares on the given points, solved in a Chebyshev basis
/// scaled to `[lo, hi]` and converted back to monomials.
pub fn weighted_lsq(
    xs: &[f64],
    ys: &[f64],
    ws: &[f64],
    degree: usize,
    lo: f64,
    hi: f64,
) -> Result<Polynomial> {
    let n = xs.len();
    if n <= degree {
        return Err(Error::IllConditioned(format!(
            "{n} samples cannot determine a degree-{degree} polynomial"
        )));
    }
    let (scale, shift) = unit_map(lo, hi);
    let cols = degree + 1;
    let mut a = DMatrix::<f64>::zeros(n, cols);
    let mut b = DVector::<f64>::zeros(n);
    let mut row = vec![0.0; cols];
    for i in 0..n {
        let sw = ws[i].sqrt();
        chebyshev_values(scale * xs[i] + shift, &mut row);
        for j in 0..cols {
            a[(i, j)] = sw * row[j];
        }
        b[i] = sw * ys[i];
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin / smax < RCOND {
        return Err(Error::IllConditioned(format!(
            "singular value ratio {:.3e} for degree {degree}",
            smin / smax
        )));
    }
    let coef = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    Ok(chebyshev_to_polynomial(coef.as_slice(), scale, shift))
}

/// Minimizes `Σ w_i (y_i - f(x_i))²` over `n_samples` uniform points of
/// `range`.
pub fn fit_weighted_ls(
    target: impl Fn(f64) -> f64,
    range: &ApproxRange,
    degree: usize,
    weights: &WeightScheme,
    n_samples: usize,
) -> Result<Polynomial> {
    weights.validate()?;
    let xs = uniform_samples(range.lo, range.hi, n_samples);
    let ys: Vec<f64> = xs.iter().map(|&x| target(x)).collect();
    let ws: Vec<f64> = xs.iter().map(|&x| weights.weight(x)).collect();
    weighted_lsq(&xs, &ys, &ws, degree, range.lo, range.hi)
}

/// Ordinary least squares: every weight is 1.
pub fn fit_ols(
    target: impl Fn(f64) -> f64,
    range: &ApproxRange,
    degree: usize,
    n_samples: usize,
) -> Result<Polynomial> {
    fit_weighted_ls(target, range, degree, &WeightScheme::uniform(), n_samples)
}

/// Error summary of an activation fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub degree: usize,
    pub lo: f64,
    pub hi: f64,
    pub rmse_uniform: f64,
    pub rmse_weighted: f64,
    pub rmse_inner: f64,
    pub max_error: f64,
}

/// Evaluates `p` against `target` on a dense uniform grid of `range`.
pub fn fit_report(
    p: &Polynomial,
    target: impl Fn(f64) -> f64,
    range: &ApproxRange,
    weights: &WeightScheme,
) -> FitReport {
    let xs = uniform_samples(range.lo, range.hi, 20_001);
    let mut sum = 0.0;
    let mut wsum = 0.0;
    let mut werr = 0.0;
    let mut inner = 0.0;
    let mut inner_n = 0usize;
    let mut max_error: f64 = 0.0;
    for &x in &xs {
        let e = p.eval(x) - target(x);
        let w = weights.weight(x);
        sum += e * e;
        werr += w * e * e;
        wsum += w;
        if x >= weights.inner_lo && x <= weights.inner_hi {
            inner += e * e;
            inner_n += 1;
        }
        max_error = max_error.max(e.abs());
    }
    FitReport {
        degree: p.degree(),
        lo: range.lo,
        hi: range.hi,
        rmse_uniform: (sum / xs.len() as f64).sqrt(),
        rmse_weighted: (werr / wsum).sqrt(),
        rmse_inner: if inner_n > 0 {
            (inner / inner_n as f64).sqrt()
        } else {
            f64::NAN
        },
        max_error,
    }
}
