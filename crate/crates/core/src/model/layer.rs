use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::approx::Polynomial;
use crate::error::{Error, Result};
use crate::spline::{fuse_weights, gen_permutation, GridMatrix, PermutationSpec};

/// Mean and standard deviation of a layer's activation inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActStats {
    pub mu: f64,
    pub sigma: f64,
}

/// One KAN layer: `y_o = Σ_i W_b[o,i]·silu(x_i) + Σ_{i,m} S[o,i,m]·B_{m,k}(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KanLayer {
    w_b: DMatrix<f64>,
    /// Flat `n_o × n_i × (g+k)` tensor, last index fastest.
    s: Vec<f64>,
    grid: GridMatrix,
    silu_poly: Polynomial,
    act_stats: ActStats,
}

impl KanLayer {
    pub fn new(
        w_b: DMatrix<f64>,
        s: Vec<f64>,
        grid: GridMatrix,
        silu_poly: Polynomial,
        act_stats: ActStats,
    ) -> Result<Self> {
        let n_i = grid.n_i();
        if w_b.ncols() != n_i || w_b.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "W_b is {}×{}, grid has {n_i} rows",
                w_b.nrows(),
                w_b.ncols()
            )));
        }
        let want = w_b.nrows() * n_i * grid.basis_count();
        if s.len() != want {
            return Err(Error::DimensionMismatch(format!(
                "spline tensor has {} entries, expected n_o·n_i·(g+k) = {want}",
                s.len()
            )));
        }
        if w_b.iter().chain(&s).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite layer weight".into()));
        }
        Ok(KanLayer {
            w_b,
            s,
            grid,
            silu_poly,
            act_stats,
        })
    }

    /// Layer with every weight zero.
    pub fn zeros(n_o: usize, grid: GridMatrix, silu_poly: Polynomial) -> Result<Self> {
        let n_i = grid.n_i();
        let s = vec![0.0; n_o * n_i * grid.basis_count()];
        Self::new(
            DMatrix::zeros(n_o, n_i),
            s,
            grid,
            silu_poly,
            ActStats { mu: 0.0, sigma: 1.0 },
        )
    }

    pub fn n_i(&self) -> usize {
        self.w_b.ncols()
    }

    pub fn n_o(&self) -> usize {
        self.w_b.nrows()
    }

    pub fn g(&self) -> usize {
        self.grid.g()
    }

    pub fn k(&self) -> usize {
        self.grid.k()
    }

    pub fn w_b(&self) -> &DMatrix<f64> {
        &self.w_b
    }

    pub fn spline_tensor(&self) -> &[f64] {
        &self.s
    }

    /// `S[o, i, m]`
    pub fn coeff(&self, o: usize, i: usize, m: usize) -> f64 {
        let gk = self.grid.basis_count();
        self.s[(o * self.n_i() + i) * gk + m]
    }

    /// The `g + k` coefficients of edge `(o, i)`.
    pub fn edge_coeffs(&self, o: usize, i: usize) -> &[f64] {
        let gk = self.grid.basis_count();
        let start = (o * self.n_i() + i) * gk;
        &self.s[start..start + gk]
    }

    pub fn grid(&self) -> &GridMatrix {
        &self.grid
    }

    pub fn grid_mut(&mut self) -> &mut GridMatrix {
        &mut self.grid
    }

    pub fn silu_poly(&self) -> &Polynomial {
        &self.silu_poly
    }

    pub fn set_silu_poly(&mut self, p: Polynomial, stats: ActStats) {
        self.silu_poly = p;
        self.act_stats = stats;
    }

    pub fn act_stats(&self) -> ActStats {
        self.act_stats
    }

    /// Spline weights on the row-major basis vector:
    /// `W′[o][i·(g+k) + m] = S[o, i, m]`.
    pub fn w_prime(&self) -> DMatrix<f64> {
        let gk = self.grid.basis_count();
        let n_i = self.n_i();
        DMatrix::from_fn(self.n_o(), n_i * gk, |o, c| self.coeff(o, c / gk, c % gk))
    }

    /// Column-major (basis layout) to row-major reordering.
    pub fn permutation(&self) -> PermutationSpec {
        gen_permutation(self.n_i(), self.grid.basis_count()).expect("layer dimensions are positive")
    }

    /// `W′·P`, applied directly to the encrypted basis layout.
    pub fn fused_weights(&self) -> DMatrix<f64> {
        fuse_weights(&self.w_prime(), &self.permutation()).expect("dimensions agree by construction")
    }
}

/// Stack of layers applied to a raster-ordered `h × w × c` input.
#[derive(Debug, Clone, PartialEq)]
pub struct KanModel {
    layers: Vec<KanLayer>,
    input_shape: [usize; 3],
}

impl KanModel {
    pub fn new(layers: Vec<KanLayer>, input_shape: [usize; 3]) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("a model needs at least one layer".into()));
        }
        let n1: usize = input_shape.iter().product();
        if n1 != layers[0].n_i() {
            return Err(Error::DimensionMismatch(format!(
                "input shape {input_shape:?} has {n1} values, first layer takes {}",
                layers[0].n_i()
            )));
        }
        for (j, w) in layers.windows(2).enumerate() {
            if w[0].n_o() != w[1].n_i() {
                return Err(Error::DimensionMismatch(format!(
                    "layer {j} outputs {} values, layer {} takes {}",
                    w[0].n_o(),
                    j + 1,
                    w[1].n_i()
                )));
            }
        }
        Ok(KanModel { layers, input_shape })
    }

    /// Single-layer model over a flat input.
    pub fn single(layer: KanLayer) -> Self {
        let n = layer.n_i();
        KanModel {
            layers: vec![layer],
            input_shape: [1, n, 1],
        }
    }

    pub fn layers(&self) -> &[KanLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [KanLayer] {
        &mut self.layers
    }

    pub fn input_shape(&self) -> [usize; 3] {
        self.input_shape
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_i()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].n_o()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer() -> KanLayer {
        let grid = GridMatrix::uniform(2, -1.0, 1.0, 1, 1).unwrap();
        // n_o = 1, n_i = 2, g + k = 2
        KanLayer::new(
            DMatrix::zeros(1, 2),
            vec![1.0, 2.0, 3.0, 4.0],
            grid,
            Polynomial::identity(),
            ActStats { mu: 0.0, sigma: 1.0 },
        )
        .unwrap()
    }

    #[test]
    fn w_prime_and_fusion() {
        let l = layer();
        assert_eq!(l.coeff(0, 1, 0), 3.0);
        assert_eq!(l.w_prime().as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(l.fused_weights().as_slice(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn shape_checks() {
        let l = layer();
        assert!(KanModel::new(vec![l.clone()], [1, 2, 1]).is_ok());
        assert!(KanModel::new(vec![l.clone()], [2, 2, 1]).is_err());
        assert!(KanModel::new(vec![l.clone(), l], [1, 2, 1]).is_err());
        let grid = GridMatrix::uniform(2, -1.0, 1.0, 1, 1).unwrap();
        assert!(KanLayer::new(
            DMatrix::zeros(1, 2),
            vec![0.0; 3],
            grid,
            Polynomial::zero(),
            ActStats { mu: 0.0, sigma: 1.0 }
        )
        .is_err());
    }
}
