use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real polynomial in monomial form, coefficients in ascending degree.
///
/// Serializes as a bare JSON array of coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Trailing exact zeros are trimmed so that the leading coefficient is
    /// non-zero unless this is the zero polynomial.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The identity map `x ↦ x`.
    pub fn identity() -> Self {
        Polynomial::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// True when every even-degree coefficient is exactly zero.
    pub fn is_odd(&self) -> bool {
        self.coeffs.iter().step_by(2).all(|&c| c == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `a * self + b`
    pub fn affine(&self, a: f64, b: f64) -> Polynomial {
        let mut c: Vec<f64> = self.coeffs.iter().map(|x| x * a).collect();
        c[0] += b;
        Polynomial::new(c)
    }

    /// Composition `self(inner(x))`.
    pub fn compose(&self, inner: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(inner);
            acc.coeffs[0] += c;
        }
        Polynomial::new(acc.coeffs)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl TryFrom<Vec<f64>> for Polynomial {
    type Error = Error;

    fn try_from(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::SchemaMismatch("non-finite polynomial coefficient".into()));
        }
        Ok(Polynomial::new(coeffs))
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_trailing_zeros() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert_eq!(Polynomial::new(vec![]).degree(), 0);
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn horner_and_compose() {
        let p = Polynomial::new(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        let q = Polynomial::new(vec![0.5, 2.0]);
        let pq = p.compose(&q);
        for x in [-1.0, 0.0, 0.3, 2.0] {
            assert!((pq.eval(x) - p.eval(q.eval(x))).abs() < 1e-12);
        }
    }

    #[test]
    fn json_is_a_bare_array() {
        let p = Polynomial::new(vec![0.0, 1.5, -2.25]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[0.0,1.5,-2.25]");
        let back: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn oddness() {
        assert!(Polynomial::new(vec![0.0, 1.0, 0.0, -0.5]).is_odd());
        assert!(!Polynomial::new(vec![0.1, 1.0]).is_odd());
    }
}
