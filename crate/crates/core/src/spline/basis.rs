use crate::error::{Error, Result};

/// All `B_{m,k}(x)` for `m = 0 .. knots.len() - k - 2` by the Cox-de Boor
/// recursion, with half-open order-0 intervals and `0/0 := 0`.
pub fn bspline_basis_plain(x: f64, knots: &[f64], k: usize) -> Result<Vec<f64>> {
    if knots.len() < k + 2 {
        return Err(Error::InsufficientKnots {
            knots: knots.len(),
            degree: k,
        });
    }
    let n0 = knots.len() - 1;
    let mut b: Vec<f64> = (0..n0)
        .map(|m| {
            if knots[m] <= x && x < knots[m + 1] {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    for j in 1..=k {
        let next: Vec<f64> = (0..n0 - j)
            .map(|m| {
                ratio(x - knots[m], knots[m + j] - knots[m]) * b[m]
                    + ratio(knots[m + j + 1] - x, knots[m + j + 1] - knots[m + 1]) * b[m + 1]
            })
            .collect();
        b = next;
    }
    Ok(b)
}

/// `Σ_m c_m B_{m,k}(x)`.
pub fn spline_value(x: f64, knots: &[f64], k: usize, coeffs: &[f64]) -> Result<f64> {
    let b = bspline_basis_plain(x, knots, k)?;
    if b.len() != coeffs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} basis functions, {} coefficients",
            b.len(),
            coeffs.len()
        )));
    }
    Ok(b.iter().zip(coeffs).map(|(b, c)| b * c).sum())
}
