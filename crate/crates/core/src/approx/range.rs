use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-width used when the samples have zero spread.
pub const DEGENERATE_HALF_WIDTH: f64 = 1e-6;

/// Interval over which an activation is approximated, with the input
/// statistics it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxRange {
    pub lo: f64,
    pub hi: f64,
    pub mu: f64,
    pub sigma: f64,
    /// Set when `sigma == 0` and the interval is a tiny window around `mu`.
    #[serde(default)]
    pub degenerate: bool,
}

impl ApproxRange {
    /// A range given directly; `mu` and `sigma` are taken from a uniform
    /// distribution on `[lo, hi]`.
    pub fn fixed(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidRange { lo, hi });
        }
        Ok(ApproxRange {
            lo,
            hi,
            mu: 0.5 * (lo + hi),
            sigma: (hi - lo) / 12f64.sqrt(),
            degenerate: false,
        })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Mean and sample standard deviation (n - 1 denominator; 0 for one sample).
pub fn mean_std(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let mu = samples.iter().sum::<f64>() / n;
    if samples.len() == 1 {
        return Ok((mu, 0.0));
    }
    let var = samples.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mu, var.sqrt()))
}

/// `[max(mu - factor·sigma, x_min), min(mu + factor·sigma, x_max)]` from
/// summary statistics.
pub fn range_from_stats(mu: f64, sigma: f64, x_min: f64, x_max: f64, factor: f64) -> Result<ApproxRange> {
    if !(x_min <= x_max) {
        return Err(Error::InvalidRange { lo: x_min, hi: x_max });
    }
    if !(sigma >= 0.0) || !(factor > 0.0) {
        return Err(Error::InvalidRange {
            lo: mu - factor * sigma,
            hi: mu + factor * sigma,
        });
    }
    if sigma == 0.0 {
        return Ok(ApproxRange {
            lo: mu - DEGENERATE_HALF_WIDTH,
            hi: mu + DEGENERATE_HALF_WIDTH,
            mu,
            sigma,
            degenerate: true,
        });
    }
    let lo = (mu - factor * sigma).max(x_min);
    let hi = (mu + factor * sigma).min(x_max);
    if !(lo < hi) {
        return Err(Error::InvalidRange { lo, hi });
    }
    Ok(ApproxRange {
        lo,
        hi,
        mu,
        sigma,
        degenerate: false,
    })
}

/// Approximation range from observed activation inputs. With the default
/// factor of 5, Chebyshev's inequality bounds the mass outside by 4%.
pub fn estimate_range(samples: &[f64], x_min: f64, x_max: f64, factor: f64) -> Result<ApproxRange> {
    let (mu, sigma) = mean_std(samples)?;
    range_from_stats(mu, sigma, x_min, x_max, factor)
}

/// Piecewise-constant sample weights: heavier inside `[inner_lo, inner_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    pub inner_lo: f64,
    pub inner_hi: f64,
    pub inner_weight: f64,
    pub outer_weight: f64,
}

impl WeightScheme {
    /// `mu ± 3·sigma` weighted 10, everything else weighted 1.
    pub fn for_range(range: &ApproxRange) -> Self {
        WeightScheme {
            inner_lo: range.mu - 3.0 * range.sigma,
            inner_hi: range.mu + 3.0 * range.sigma,
            inner_weight: 10.0,
            outer_weight: 1.0,
        }
    }

    pub fn uniform() -> Self {
        WeightScheme {
            inner_lo: 0.0,
            inner_hi: 0.0,
            inner_weight: 1.0,
            outer_weight: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outer_weight > 0.0) || !(self.inner_weight >= self.outer_weight) {
            return Err(Error::IllConditioned(format!(
                "weights must satisfy inner ({}) >= outer ({}) > 0",
                self.inner_weight, self.outer_weight
            )));
        }
        Ok(())
    }

    pub fn weight(&self, x: f64) -> f64 {
        if x >= self.inner_lo && x <= self.inner_hi {
            self.inner_weight
        } else {
            self.outer_weight
        }
    }
}

/// Per-dataset activation settings (range and degree) from the reference
/// experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiluPreset {
    Mnist,
    FashionMnist,
    Cifar10,
}

impl SiluPreset {
    pub fn range(self) -> (f64, f64) {
        match self {
            SiluPreset::Mnist => (-12.4, 14.74),
            SiluPreset::FashionMnist => (-9.77, 11.01),
            SiluPreset::Cifar10 => (-11.90, 10.99),
        }
    }

    pub fn degree(self) -> usize {
        match self {
            SiluPreset::Mnist | SiluPreset::FashionMnist => 10,
            SiluPreset::Cifar10 => 15,
        }
    }

    /// The range read as `mu ± 5·sigma` (no clamping).
    pub fn approx_range(self) -> ApproxRange {
        let (lo, hi) = self.range();
        ApproxRange {
            lo,
            hi,
            mu: 0.5 * (lo + hi),
            sigma: (hi - lo) / 10.0,
            degenerate: false,
        }
    }
}
