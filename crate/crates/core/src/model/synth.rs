//! Seeded random models for tests and benchmarks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fit::fit_activation;
use super::{layer_forward_plain, ForwardMode, KanLayer, KanModel};
use crate::approx::Polynomial;
use crate::error::{Error, Result};
use crate::spline::GridMatrix;

/// Shape and fitting parameters of a synthetic model.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// `[n_1, n_2, …, n_out]`
    pub widths: Vec<usize>,
    pub g: usize,
    pub k: usize,
    pub silu_degree: usize,
    /// Calibration samples drawn uniformly from `[-1, 1]^{n_1}`.
    pub calibration: usize,
}

impl SynthSpec {
    pub fn new(widths: &[usize], g: usize, k: usize) -> Self {
        SynthSpec {
            widths: widths.to_vec(),
            g,
            k,
            silu_degree: 10,
            calibration: 32,
        }
    }
}

/// Uniform inputs in `[-1, 1]`.
pub fn random_inputs(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

/// Layer with uniform grid on `[lo, hi]` and weights scaled so outputs stay
/// of order one.
pub fn random_layer(rng: &mut impl Rng, n_i: usize, n_o: usize, g: usize, k: usize, lo: f64, hi: f64) -> Result<KanLayer> {
    let grid = GridMatrix::uniform(n_i, lo, hi, g, k)?;
    let scale = 1.0 / (n_i as f64).sqrt();
    let w_b = DMatrix::from_fn(n_o, n_i, |_, _| scale * rng.random_range(-1.0..1.0));
    let s = (0..n_o * n_i * grid.basis_count())
        .map(|_| scale * rng.random_range(-1.0..1.0))
        .collect();
    KanLayer::new(
        w_b,
        s,
        grid,
        Polynomial::identity(),
        super::ActStats { mu: 0.0, sigma: 1.0 },
    )
}

/// Random model whose later grids, bounds and SiLU fits are calibrated on
/// the activations of random inputs. Returns the calibration inputs too.
pub fn random_model(seed: u64, spec: &SynthSpec) -> Result<(KanModel, Vec<Vec<f64>>)> {
    if spec.widths.len() < 2 || spec.widths.contains(&0) {
        return Err(Error::InvalidConfig("need at least two positive widths".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = random_inputs(&mut rng, spec.calibration.max(2), spec.widths[0]);
    let mut h = inputs.clone();
    let mut layers = Vec::with_capacity(spec.widths.len() - 1);
    for w in spec.widths.windows(2) {
        let flat: Vec<f64> = h.iter().flatten().copied().collect();
        let (lo, hi) = if layers.is_empty() {
            (-1.0, 1.0)
        } else {
            let lo = flat.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = flat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = 0.05 * (hi - lo).max(1e-3);
            (lo - pad, hi + pad)
        };
        let mut layer = random_layer(&mut rng, w[0], w[1], spec.g, spec.k, lo, hi)?;
        layer.grid_mut().calibrate_bound(flat.iter().copied());
        let (p, stats) = fit_activation(&flat, layer.grid().bound(), spec.silu_degree, 5.0)?;
        layer.set_silu_poly(p, stats);
        h = h
            .iter()
            .map(|x| layer_forward_plain(&layer, x, ForwardMode::Exact))
            .collect::<Result<_>>()?;
        layers.push(layer);
    }
    let n1 = spec.widths[0];
    Ok((KanModel::new(layers, [1, n1, 1])?, inputs))
}
