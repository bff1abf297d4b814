use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::eval::{eval_poly_tree, poly_depth};
use super::remez::{fit_odd_sign, RemezOptions};
use super::Polynomial;
use crate::error::{Error, Result};
use crate::par::{self, ExecMode};

/// Composition of odd polynomials approximating `sign` on `±[2^-α, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSign {
    stages: Vec<Polynomial>,
    precision_alpha: f64,
    target_eps: f64,
    /// Worst `|composed(x) - sign(x)|` found by the dense certification scan.
    certified_error: f64,
}

impl CompositeSign {
    pub const DEFAULT_ALPHA: f64 = 7.0;
    pub const DEFAULT_DEGREES: [usize; 3] = [15, 15, 15];
    pub const CERTIFY_POINTS: usize = 100_000;

    pub fn default_eps() -> f64 {
        2f64.powi(-10)
    }

    /// Builds the stages greedily: stage `i` is the odd minimax fit of
    /// `sign` on the interval the previous stages map `[δ, 1]` into.
    pub fn generate(alpha: f64, target_eps: f64, degrees: &[usize]) -> Result<Self> {
        if degrees.is_empty() || !(target_eps > 0.0) || !(alpha > 0.0) {
            return Err(Error::InvalidConfig(
                "composite sign needs at least one stage, alpha > 0 and eps > 0".into(),
            ));
        }
        let opts = RemezOptions {
            grid_points: 40_000,
            ..RemezOptions::default()
        };
        let mut lo = 2f64.powf(-alpha);
        let mut hi = 1.0;
        let mut stages = Vec::with_capacity(degrees.len());
        for &d in degrees {
            let (p, mm) = fit_odd_sign(lo, hi, d, &opts)?;
            // |p - 1| <= max_error on [lo, hi], so the image is bracketed by 1 ± e
            let e = mm.max_error * (1.0 + 1e-6) + 1e-15;
            lo = 1.0 - e;
            hi = 1.0 + e;
            stages.push(p);
        }
        Self::from_stages(stages, alpha, target_eps)
    }

    /// Validates and certifies externally supplied stages.
    pub fn from_stages(stages: Vec<Polynomial>, alpha: f64, target_eps: f64) -> Result<Self> {
        if stages.is_empty() || stages.iter().any(|p| !p.is_odd()) {
            return Err(Error::InvalidConfig("composite sign stages must be odd".into()));
        }
        let mut cs = CompositeSign {
            stages,
            precision_alpha: alpha,
            target_eps,
            certified_error: f64::NAN,
        };
        let err = cs.scan_error(Self::CERTIFY_POINTS);
        if !(err <= target_eps) {
            return Err(Error::CompositeSignAccuracy {
                achieved: err,
                target: target_eps,
            });
        }
        cs.certified_error = err;
        Ok(cs)
    }

    /// Shared default instance (`δ = 2^-7`, `ε = 2^-10`, degrees 15, 15, 15).
    pub fn standard() -> Arc<CompositeSign> {
        static STD: OnceLock<Arc<CompositeSign>> = OnceLock::new();
        STD.get_or_init(|| {
            Arc::new(
                CompositeSign::generate(
                    Self::DEFAULT_ALPHA,
                    Self::default_eps(),
                    &Self::DEFAULT_DEGREES,
                )
                .expect("default composite sign parameters certify"),
            )
        })
        .clone()
    }

    pub fn stages(&self) -> &[Polynomial] {
        &self.stages
    }

    pub fn precision_alpha(&self) -> f64 {
        self.precision_alpha
    }

    /// Smallest input magnitude with a guaranteed output, `2^-α`.
    pub fn delta(&self) -> f64 {
        2f64.powf(-self.precision_alpha)
    }

    pub fn target_eps(&self) -> f64 {
        self.target_eps
    }

    pub fn certified_error(&self) -> f64 {
        self.certified_error
    }

    /// Approximate `sign(x)` for `x ∈ [-1, 1]`.
    pub fn sign(&self, x: f64) -> f64 {
        self.stages.iter().fold(x, |y, p| eval_poly_tree(p, y))
    }

    /// The final stage with the `(s + 1) / 2` step map folded in.
    pub fn step_stage(&self) -> Polynomial {
        self.stages[self.stages.len() - 1].affine(0.5, 0.5)
    }

    /// Approximate step function: 1 above zero, 0 below, exactly ½ at zero.
    /// Evaluated in the homomorphic operation order.
    pub fn step(&self, x: f64) -> f64 {
        let n = self.stages.len();
        let y = self.stages[..n - 1].iter().fold(x, |y, p| eval_poly_tree(p, y));
        eval_poly_tree(&self.step_stage(), y)
    }

    /// Multiplicative depth of the homomorphic evaluation.
    pub fn depth(&self) -> usize {
        self.stages.iter().map(poly_depth).sum()
    }

    /// Largest `|sign(x) - composed(x)|` over `n` points of `[δ, 1]`
    /// (the negative side follows by oddness).
    pub fn scan_error(&self, n: usize) -> f64 {
        let d = self.delta();
        par::max_range(ExecMode::Parallel, n, |i| {
            let x = d + (1.0 - d) * i as f64 / (n - 1).max(1) as f64;
            (self.sign(x) - 1.0).abs()
        })
    }
}

/// How interval membership is decided inside the B-spline evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Comparator {
    /// Cleartext step function run through the same dataflow; isolates
    /// comparator error from pipeline error.
    Exact,
    Composite(Arc<CompositeSign>),
}

impl Comparator {
    pub fn composite() -> Self {
        Comparator::Composite(CompositeSign::standard())
    }

    pub fn from_mode(mode: ComparatorMode) -> Self {
        match mode {
            ComparatorMode::Exact => Comparator::Exact,
            ComparatorMode::Composite => Comparator::composite(),
        }
    }

    pub fn mode(&self) -> ComparatorMode {
        match self {
            Comparator::Exact => ComparatorMode::Exact,
            Comparator::Composite(_) => ComparatorMode::Composite,
        }
    }

    /// Approximation of `1[u > 0] + ½·1[u = 0]`.
    pub fn step(&self, u: f64) -> f64 {
        match self {
            Comparator::Exact => exact_step(u),
            Comparator::Composite(cs) => cs.step(u),
        }
    }

    /// Levels consumed per comparison.
    pub fn depth(&self) -> usize {
        match self {
            Comparator::Exact => 1,
            Comparator::Composite(cs) => cs.depth(),
        }
    }
}

pub(crate) fn exact_step(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        0.0
    } else {
        0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparatorMode {
    Exact,
    #[default]
    Composite,
}
