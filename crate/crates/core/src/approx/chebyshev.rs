//! Chebyshev-basis helpers used by the fitters for conditioning.

use super::Polynomial;

/// Writes `T_0(t) .. T_{n-1}(t)` into `out`.
pub(crate) fn chebyshev_values(t: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n > 1 {
        out[1] = t;
    }
    for j in 2..n {
        out[j] = 2.0 * t * out[j - 1] - out[j - 2];
    }
}

/// Monomial coefficients (in `t`) of `T_0 .. T_{n-1}`.
fn chebyshev_monomials(n: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let c = match j {
            0 => vec![1.0],
            1 => vec![0.0, 1.0],
            _ => {
                let mut c = vec![0.0; j + 1];
                for (i, v) in out[j - 1].iter().enumerate() {
                    c[i + 1] += 2.0 * v;
                }
                for (i, v) in out[j - 2].iter().enumerate() {
                    c[i] -= v;
                }
                c
            }
        };
        out.push(c);
    }
    out
}

/// Converts `Σ a_j T_j(t)` with `t = scale·x + shift` into monomials in `x`.
pub(crate) fn chebyshev_to_polynomial(a: &[f64], scale: f64, shift: f64) -> Polynomial {
    let basis = chebyshev_monomials(a.len());
    let mut in_t = vec![0.0; a.len().max(1)];
    for (aj, tj) in a.iter().zip(&basis) {
        for (i, c) in tj.iter().enumerate() {
            in_t[i] += aj * c;
        }
    }
    let affine = Polynomial::new(vec![shift, scale]);
    Polynomial::new(in_t).compose(&affine)
}

/// Affine map taking `[lo, hi]` onto `[-1, 1]`, as `(scale, shift)`.
pub(crate) fn unit_map(lo: f64, hi: f64) -> (f64, f64) {
    let scale = 2.0 / (hi - lo);
    (scale, -(hi + lo) / (hi - lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t3_expansion() {
        let p = chebyshev_to_polynomial(&[0.0, 0.0, 0.0, 1.0], 1.0, 0.0);
        assert_eq!(p.coeffs(), &[0.0, -3.0, 0.0, 4.0]);
    }

    #[test]
    fn conversion_matches_direct_sum() {
        let a = [0.3, -1.2, 0.7, 0.05, -0.4, 0.11];
        let (s, b) = unit_map(-3.0, 5.0);
        let p = chebyshev_to_polynomial(&a, s, b);
        let mut vals = [0.0; 6];
        for k in 0..=40 {
            let x = -3.0 + 8.0 * k as f64 / 40.0;
            chebyshev_values(s * x + b, &mut vals);
            let direct: f64 = a.iter().zip(&vals).map(|(x, y)| x * y).sum();
            assert!((p.eval(x) - direct).abs() < 1e-12);
        }
    }
}
