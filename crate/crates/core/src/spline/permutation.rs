use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Bijection on `0 .. n_r·n_c` sending column-major positions of an
/// `n_r × n_c` matrix to row-major ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSpec {
    n_r: usize,
    n_c: usize,
    /// `mapping[source] = target`, 0-based.
    mapping: Vec<usize>,
}

/// Column-major to row-major reordering: 1-based source `(c-1)·n_r + r`
/// goes to target `(r-1)·n_c + c`.
pub fn gen_permutation(n_r: usize, n_c: usize) -> Result<PermutationSpec> {
    if n_r == 0 || n_c == 0 {
        return Err(Error::InvalidConfig("permutation dimensions must be positive".into()));
    }
    let mut mapping = vec![0; n_r * n_c];
    for r in 0..n_r {
        for c in 0..n_c {
            mapping[c * n_r + r] = r * n_c + c;
        }
    }
    Ok(PermutationSpec { n_r, n_c, mapping })
}

impl PermutationSpec {
    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    pub fn dim(&self) -> usize {
        self.mapping.len()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn target(&self, source: usize) -> usize {
        self.mapping[source]
    }

    /// `(P·v)[target(s)] = v[s]`
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a permutation of size {}",
                v.len(),
                self.dim()
            )));
        }
        let mut out = vec![0.0; v.len()];
        for (s, &t) in self.mapping.iter().enumerate() {
            out[t] = v[s];
        }
        Ok(out)
    }

    /// The inverse (row-major back to column-major), equal to the transpose.
    pub fn inverse(&self) -> PermutationSpec {
        let mut mapping = vec![0; self.dim()];
        for (s, &t) in self.mapping.iter().enumerate() {
            mapping[t] = s;
        }
        PermutationSpec {
            n_r: self.n_c,
            n_c: self.n_r,
            mapping,
        }
    }

    /// `P[target][source] = 1`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (s, &t) in self.mapping.iter().enumerate() {
            m[(t, s)] = 1.0;
        }
        m
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(s, &t)| s == t)
    }
}

/// `W_f = W′·P`, a column permutation: `W_f[:, s] = W′[:, target(s)]`.
pub fn fuse_weights(w_prime: &DMatrix<f64>, p: &PermutationSpec) -> Result<DMatrix<f64>> {
    if w_prime.ncols() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "W′ has {} columns, permutation has size {}",
            w_prime.ncols(),
            p.dim()
        )));
    }
    Ok(DMatrix::from_fn(w_prime.nrows(), p.dim(), |o, s| w_prime[(o, p.target(s))]))
}
