use super::{KanLayer, KanModel};
use crate::approx::{eval_poly_tree, silu, Comparator};
use crate::error::{Error, Result};
use crate::spline::{bspline_basis_mirrored, bspline_basis_plain};

/// How the plaintext forward pass treats the non-polynomial parts.
#[derive(Debug, Clone, Copy)]
pub enum ForwardMode<'a> {
    /// True SiLU and exact basis indicators.
    Exact,
    /// The layer's SiLU polynomial and the given comparator, replaying the
    /// encrypted pipeline's arithmetic.
    Mirrored(&'a Comparator),
}

/// Edge activation `w_b·silu(x) + w_s·Σ_m c_m B_{m,k}(x)`.
pub fn phi(x: f64, w_b: f64, w_s: f64, coeffs: &[f64], knots: &[f64], k: usize) -> Result<f64> {
    let b = bspline_basis_plain(x, knots, k)?;
    if b.len() != coeffs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} basis functions, {} coefficients",
            b.len(),
            coeffs.len()
        )));
    }
    let spline: f64 = b.iter().zip(coeffs).map(|(b, c)| b * c).sum();
    Ok(w_b * silu(x) + w_s * spline)
}

/// Per-feature SiLU values and basis vectors under `mode`.
pub(crate) fn layer_features(layer: &KanLayer, x: &[f64], mode: ForwardMode<'_>) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let grid = layer.grid();
    let k = layer.k();
    let mut act = Vec::with_capacity(x.len());
    let mut basis = Vec::with_capacity(x.len());
    for (i, &xi) in x.iter().enumerate() {
        match mode {
            ForwardMode::Exact => {
                act.push(silu(xi));
                basis.push(bspline_basis_plain(xi, grid.knots(i), k)?);
            }
            ForwardMode::Mirrored(cmp) => {
                act.push(eval_poly_tree(layer.silu_poly(), xi));
                basis.push(bspline_basis_mirrored(xi, grid.knots(i), k, grid.scale(), cmp));
            }
        }
    }
    Ok((act, basis))
}

pub fn layer_forward_plain(layer: &KanLayer, x: &[f64], mode: ForwardMode<'_>) -> Result<Vec<f64>> {
    if x.len() != layer.n_i() {
        return Err(Error::DimensionMismatch(format!(
            "layer takes {} inputs, got {}",
            layer.n_i(),
            x.len()
        )));
    }
    let (act, basis) = layer_features(layer, x, mode)?;
    let w_b = layer.w_b();
    Ok((0..layer.n_o())
        .map(|o| {
            let mut y = 0.0;
            for i in 0..layer.n_i() {
                y += w_b[(o, i)] * act[i];
                y += layer
                    .edge_coeffs(o, i)
                    .iter()
                    .zip(&basis[i])
                    .map(|(c, b)| c * b)
                    .sum::<f64>();
            }
            y
        })
        .collect())
}

pub fn model_forward_plain(model: &KanModel, x: &[f64], mode: ForwardMode<'_>) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::DimensionMismatch("empty input".into()));
    }
    let mut h = x.to_vec();
    for layer in model.layers() {
        h = layer_forward_plain(layer, &h, mode)?;
    }
    Ok(h)
}
