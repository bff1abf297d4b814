//! Polynomial approximation of non-polynomial functions: least-squares and
//! minimax fits of SiLU, and a composite polynomial sign for comparisons.

mod chebyshev;
mod eval;
mod lsq;
mod polynomial;
mod range;
mod remez;
mod sign;

pub use eval::{
    apply_comparator, eval_poly_he, eval_poly_he_masked, eval_poly_tree, poly_comp, poly_depth,
};
pub use lsq::{
    default_samples, fit_ols, fit_report, fit_weighted_ls, uniform_samples, weighted_lsq, FitReport,
};
pub use polynomial::Polynomial;
pub use range::{
    estimate_range, mean_std, range_from_stats, ApproxRange, SiluPreset, WeightScheme,
    DEGENERATE_HALF_WIDTH,
};
pub use remez::{fit_odd_sign, fit_remez, fit_remez_with, remez, Minimax, RemezOptions};
pub use sign::{Comparator, ComparatorMode, CompositeSign};

/// `x · sigmoid(x)`
pub fn silu(x: f64) -> f64 {
    x / (1.0 + (-x).exp())
}

/// SiLU fit with `mu ± 3 sigma` weighted 10 and the default sample count.
pub fn fit_silu_wls(range: &ApproxRange, degree: usize) -> crate::Result<Polynomial> {
    fit_weighted_ls(silu, range, degree, &WeightScheme::for_range(range), default_samples(degree))
}
