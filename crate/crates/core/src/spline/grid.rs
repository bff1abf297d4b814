use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::he::PlainVector;

/// Headroom applied to the largest knot or input magnitude when choosing `R`.
pub const BOUND_HEADROOM: f64 = 1.2;

/// Per-feature knot matrix: row `i` holds the `g + 2k + 1` knots of input `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMatrix {
    rows: Vec<Vec<f64>>,
    g: usize,
    k: usize,
    bound: f64,
    uniform: Option<UniformGrid>,
}

/// `g` equal intervals on `[lo, hi]`, extended by `k` intervals on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub g: usize,
    pub k: usize,
}

impl UniformGrid {
    pub fn knots(&self) -> Vec<f64> {
        let h = (self.hi - self.lo) / self.g as f64;
        (0..=self.g + 2 * self.k)
            .map(|j| self.lo + (j as f64 - self.k as f64) * h)
            .collect()
    }
}

impl GridMatrix {
    /// Same uniform grid for every one of `n_i` features.
    pub fn uniform(n_i: usize, lo: f64, hi: f64, g: usize, k: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidRange { lo, hi });
        }
        if g == 0 {
            return Err(Error::InvalidGrid("grid count g must be at least 1".into()));
        }
        let spec = UniformGrid { lo, hi, g, k };
        let row = spec.knots();
        let mut grid = Self::from_rows(vec![row; n_i], g, k, None)?;
        grid.uniform = Some(spec);
        Ok(grid)
    }

    /// Explicit knot rows. `bound` defaults to 1.2 × the largest knot magnitude.
    pub fn from_rows(rows: Vec<Vec<f64>>, g: usize, k: usize, bound: Option<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidGrid("grid has no rows".into()));
        }
        if g == 0 {
            return Err(Error::InvalidGrid("grid count g must be at least 1".into()));
        }
        let width = g + 2 * k + 1;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(Error::InvalidGrid(format!(
                    "row {i} has {} knots, expected g + 2k + 1 = {width}",
                    r.len()
                )));
            }
            if r.iter().any(|t| !t.is_finite()) {
                return Err(Error::InvalidGrid(format!("row {i} has a non-finite knot")));
            }
            if r.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidGrid(format!("row {i} is not non-decreasing")));
            }
        }
        let max_abs = rows.iter().flatten().fold(0.0f64, |m, t| m.max(t.abs()));
        let bound = match bound {
            Some(b) if b > 0.0 && b >= max_abs => b,
            Some(b) => {
                return Err(Error::InvalidGrid(format!(
                    "bound R = {b} must be positive and cover every knot (max |t| = {max_abs})"
                )))
            }
            None if max_abs > 0.0 => BOUND_HEADROOM * max_abs,
            None => 1.0,
        };
        Ok(GridMatrix {
            rows,
            g,
            k,
            bound,
            uniform: None,
        })
    }

    pub fn n_i(&self) -> usize {
        self.rows.len()
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of order-0 intervals, `g + 2k`.
    pub fn intervals(&self) -> usize {
        self.g + 2 * self.k
    }

    /// Number of degree-`k` basis functions, `g + k`.
    pub fn basis_count(&self) -> usize {
        self.g + self.k
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn knots(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn uniform_spec(&self) -> Option<UniformGrid> {
        self.uniform
    }

    /// Input bound `R`: inputs and knots are assumed to lie in `[-R, R]`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Factor mapping `[-R, R]` differences into `[-1, 1]`: `1 / (2R)`.
    pub fn scale(&self) -> f64 {
        1.0 / (2.0 * self.bound)
    }

    pub fn set_bound(&mut self, bound: f64) -> Result<()> {
        let max_abs = self.max_abs_knot();
        if !(bound > 0.0) || bound < max_abs {
            return Err(Error::InvalidGrid(format!(
                "bound R = {bound} must be positive and cover every knot (max |t| = {max_abs})"
            )));
        }
        self.bound = bound;
        Ok(())
    }

    /// Raises `R` to 1.2 × the largest of the knot and `inputs` magnitudes.
    pub fn calibrate_bound(&mut self, inputs: impl IntoIterator<Item = f64>) {
        let m = inputs
            .into_iter()
            .fold(self.max_abs_knot(), |m, x| m.max(x.abs()));
        if m > 0.0 {
            self.bound = self.bound.max(BOUND_HEADROOM * m);
        }
    }

    pub fn max_abs_knot(&self) -> f64 {
        self.rows.iter().flatten().fold(0.0f64, |m, t| m.max(t.abs()))
    }

    /// True when no row has a repeated knot (the recursion divides by
    /// knot differences).
    pub fn check_distinct(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            if let Some(j) = r.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::InvalidGrid(format!(
                    "row {i} repeats knot {} at position {j}",
                    r[j]
                )));
            }
        }
        Ok(())
    }

    /// Columns `l .. r-1` (1-based) concatenated column by column:
    /// slot `(j - l)·n_i + i` holds `G[i][j]`.
    pub fn col_tile(&self, l: usize, r: usize) -> Result<Vec<f64>> {
        let cols = self.g + 2 * self.k + 1;
        if l < 1 || l >= r || r > cols + 1 {
            return Err(Error::IndexOutOfRange(format!(
                "col_tile({l}, {r}) needs 1 <= l < r <= {}",
                cols + 1
            )));
        }
        let mut out = Vec::with_capacity(self.n_i() * (r - l));
        for j in l - 1..r - 1 {
            out.extend(self.rows.iter().map(|row| row[j]));
        }
        Ok(out)
    }

    /// Block `m` (0-based, `m < blocks`) holds `f(m, row_i)` in slot
    /// `m·n_i + i`; every other slot is zero.
    pub(crate) fn block_vector(&self, blocks: usize, slots: usize, f: impl Fn(usize, &[f64]) -> f64) -> PlainVector {
        let n = self.n_i();
        let mut v = vec![0.0; slots];
        for m in 0..blocks {
            for (i, row) in self.rows.iter().enumerate() {
                v[m * n + i] = f(m, row);
            }
        }
        PlainVector::from_full(v)
    }
}

/// Serialized form: explicit rows or a uniform description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Uniform { uniform: UniformGrid },
    Rows(Vec<Vec<f64>>),
}

impl GridSpec {
    pub fn of(grid: &GridMatrix) -> Self {
        match grid.uniform {
            Some(u) => GridSpec::Uniform { uniform: u },
            None => GridSpec::Rows(grid.rows.clone()),
        }
    }

    pub fn build(&self, n_i: usize, g: usize, k: usize, bound: Option<f64>) -> Result<GridMatrix> {
        let mut grid = match self {
            GridSpec::Uniform { uniform: u } => {
                if u.g != g || u.k != k {
                    return Err(Error::SchemaMismatch(format!(
                        "uniform grid (g={}, k={}) disagrees with layer (g={g}, k={k})",
                        u.g, u.k
                    )));
                }
                GridMatrix::uniform(n_i, u.lo, u.hi, g, k)?
            }
            GridSpec::Rows(rows) => {
                if rows.len() != n_i {
                    return Err(Error::SchemaMismatch(format!(
                        "grid has {} rows, layer has n_i = {n_i}",
                        rows.len()
                    )));
                }
                GridMatrix::from_rows(rows.clone(), g, k, None)?
            }
        };
        if let Some(b) = bound {
            grid.set_bound(b)?;
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> GridMatrix {
        // g = 1, k = 0: two knots per row
        GridMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]], 1, 0, None).unwrap()
    }

    #[test]
    fn col_tile_layout() {
        let g = two_by_two();
        assert_eq!(g.col_tile(1, 3).unwrap(), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(g.col_tile(1, 2).unwrap(), vec![1.0, 3.0]);
        assert_eq!(g.col_tile(2, 3).unwrap(), vec![2.0, 4.0]);
        assert!(matches!(g.col_tile(0, 2), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(g.col_tile(2, 2), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(g.col_tile(1, 4), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn uniform_extension() {
        let g = GridMatrix::uniform(3, -1.0, 1.0, 4, 2).unwrap();
        let t = g.knots(0);
        assert_eq!(t.len(), 9);
        assert!((t[0] + 2.0).abs() < 1e-15 && (t[8] - 2.0).abs() < 1e-15);
        assert!((t[2] + 1.0).abs() < 1e-15 && (t[6] - 1.0).abs() < 1e-15);
        assert!((g.bound() - 2.4).abs() < 1e-12);
        g.check_distinct().unwrap();
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(GridMatrix::from_rows(vec![vec![0.0, 1.0, 0.5]], 2, 0, None).is_err());
        assert!(GridMatrix::from_rows(vec![vec![0.0, 1.0]], 2, 0, None).is_err());
        let rep = GridMatrix::from_rows(vec![vec![0.0, 0.0, 1.0]], 2, 0, None).unwrap();
        assert!(rep.check_distinct().is_err());
        assert!(GridMatrix::from_rows(vec![vec![0.0, 3.0]], 1, 0, Some(2.0)).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let g = GridMatrix::uniform(2, 0.0, 1.0, 3, 1).unwrap();
        let s = serde_json::to_string(&GridSpec::of(&g)).unwrap();
        let back: GridSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back.build(2, 3, 1, Some(g.bound())).unwrap(), g);
        let rows = GridSpec::Rows(g.rows().to_vec());
        assert_eq!(rows.build(2, 3, 1, None).unwrap().rows(), g.rows());
    }
}
