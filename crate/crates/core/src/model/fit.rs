use std::path::Path;

use nalgebra::DMatrix;

use super::{ActStats, KanLayer};
use crate::approx::{fit_silu_wls, range_from_stats, silu, mean_std, Polynomial};
use crate::error::{Error, Result};
use crate::spline::{bspline_basis_plain, GridMatrix};

/// Paired input and target vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if inputs.is_empty() {
            return Err(Error::EmptySamples);
        }
        let (di, dt) = (inputs[0].len(), targets[0].len());
        if inputs.iter().any(|x| x.len() != di) || targets.iter().any(|y| y.len() != dt) {
            return Err(Error::ShapeMismatch("ragged dataset rows".into()));
        }
        Ok(Dataset { inputs, targets })
    }

    /// One sample per row, the last `n_targets` columns being targets. A
    /// first row that does not parse as numbers is treated as a header.
    pub fn from_csv(path: &Path, n_targets: usize) -> Result<Self> {
        let rows = read_csv_rows(path)?;
        let mut inputs = Vec::with_capacity(rows.len());
        let mut targets = Vec::with_capacity(rows.len());
        for (j, row) in rows.into_iter().enumerate() {
            if row.len() <= n_targets {
                return Err(Error::ShapeMismatch(format!(
                    "row {j} has {} columns, need more than {n_targets}",
                    row.len()
                )));
            }
            let cut = row.len() - n_targets;
            targets.push(row[cut..].to_vec());
            let mut x = row;
            x.truncate(cut);
            inputs.push(x);
        }
        Self::new(inputs, targets)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn target_dim(&self) -> usize {
        self.targets[0].len()
    }
}

/// Numeric rows of a headerless or single-header CSV file.
pub fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (j, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if j == 0 => continue,
            Err(e) => return Err(Error::CorruptFile(format!("row {j}: {e}"))),
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptySamples);
    }
    Ok(rows)
}

/// How the SiLU-branch weights are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseWeightMode {
    /// Every `W_b[o, i]` set to the value; only splines are fitted.
    Fixed(f64),
    /// `W_b` solved jointly with the spline coefficients.
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub base: BaseWeightMode,
    pub ridge: f64,
    /// Degree of the layer's SiLU polynomial.
    pub silu_degree: usize,
    /// Range half-width in standard deviations for the SiLU fit.
    pub range_factor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            base: BaseWeightMode::Fitted,
            ridge: 1e-8,
            silu_degree: 10,
            range_factor: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSummary {
    pub train_rmse: f64,
    pub samples: usize,
}

/// SiLU polynomial and input statistics for activations `xs` with bound `r`.
pub fn fit_activation(xs: &[f64], r: f64, degree: usize, factor: f64) -> Result<(Polynomial, ActStats)> {
    let (mu, sigma) = mean_std(xs)?;
    let range = range_from_stats(mu, sigma, -r, r, factor)?;
    let p = fit_silu_wls(&range, degree)?;
    Ok((p, ActStats { mu, sigma }))
}

/// Ridge least squares for one layer on fixed grids: the output is linear in
/// the spline coefficients and base weights.
pub fn fit_layer_ls(data: &Dataset, n_o: usize, grid: GridMatrix, opts: &FitOptions) -> Result<(KanLayer, FitSummary)> {
    let n_i = grid.n_i();
    if data.input_dim() != n_i {
        return Err(Error::ShapeMismatch(format!(
            "dataset has {} inputs per sample, grid has {n_i} rows",
            data.input_dim()
        )));
    }
    if data.target_dim() != n_o {
        return Err(Error::ShapeMismatch(format!(
            "dataset has {} targets per sample, layer has n_o = {n_o}",
            data.target_dim()
        )));
    }
    let mut grid = grid;
    grid.calibrate_bound(data.inputs.iter().flatten().copied());
    let gk = grid.basis_count();
    let k = grid.k();
    let fitted = opts.base == BaseWeightMode::Fitted;
    let n_spline = n_i * gk;
    let n_feat = n_spline + if fitted { n_i } else { 0 };
    let n = data.len();

    let mut phi = DMatrix::<f64>::zeros(n, n_feat);
    let mut y = DMatrix::<f64>::zeros(n, n_o);
    for (r, (x, t)) in data.inputs.iter().zip(&data.targets).enumerate() {
        let mut base = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            let b = bspline_basis_plain(xi, grid.knots(i), k)?;
            for (m, v) in b.iter().enumerate() {
                phi[(r, i * gk + m)] = *v;
            }
            if fitted {
                phi[(r, n_spline + i)] = silu(xi);
            } else {
                base += silu(xi);
            }
        }
        for o in 0..n_o {
            y[(r, o)] = match opts.base {
                BaseWeightMode::Fixed(w) => t[o] - w * base,
                BaseWeightMode::Fitted => t[o],
            };
        }
    }
    let mut gram = phi.transpose() * &phi;
    for j in 0..n_feat {
        gram[(j, j)] += opts.ridge;
    }
    let rhs = phi.transpose() * &y;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::SingularSystem(format!("{n_feat} features from {n} samples")))?;
    let theta = chol.solve(&rhs);
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("non-finite solution".into()));
    }

    let resid = &phi * &theta - &y;
    let train_rmse = (resid.iter().map(|e| e * e).sum::<f64>() / (n * n_o) as f64).sqrt();

    let mut s = vec![0.0; n_o * n_spline];
    for o in 0..n_o {
        for j in 0..n_spline {
            s[o * n_spline + j] = theta[(j, o)];
        }
    }
    let w_b = match opts.base {
        BaseWeightMode::Fixed(w) => DMatrix::from_element(n_o, n_i, w),
        BaseWeightMode::Fitted => DMatrix::from_fn(n_o, n_i, |o, i| theta[(n_spline + i, o)]),
    };
    let xs: Vec<f64> = data.inputs.iter().flatten().copied().collect();
    let (poly, stats) = fit_activation(&xs, grid.bound(), opts.silu_degree, opts.range_factor)?;
    let layer = KanLayer::new(w_b, s, grid, poly, stats)?;
    Ok((
        layer,
        FitSummary {
            train_rmse,
            samples: n,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{layer_forward_plain, ForwardMode};

    fn grid_1d(g: usize, k: usize) -> GridMatrix {
        GridMatrix::uniform(1, -1.0, 1.0, g, k).unwrap()
    }

    fn data_1d(f: impl Fn(f64) -> f64, n: usize) -> Dataset {
        let xs: Vec<Vec<f64>> = (0..n).map(|j| vec![-1.0 + 2.0 * j as f64 / (n - 1) as f64]).collect();
        let ys = xs.iter().map(|x| vec![f(x[0])]).collect();
        Dataset::new(xs, ys).unwrap()
    }

    #[test]
    fn sine_is_fitted() {
        let d = data_1d(|x| (std::f64::consts::PI * x).sin(), 401);
        let (layer, s) = fit_layer_ls(&d, 1, grid_1d(10, 3), &FitOptions::default()).unwrap();
        assert!(s.train_rmse <= 1e-2, "{}", s.train_rmse);
        let y = layer_forward_plain(&layer, &[0.5], ForwardMode::Exact).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn silu_target() {
        let d = data_1d(silu, 201);
        let (layer, s) = fit_layer_ls(&d, 1, grid_1d(5, 3), &FitOptions::default()).unwrap();
        assert!(s.train_rmse <= 1e-3, "{}", s.train_rmse);
        let fixed = FitOptions {
            base: BaseWeightMode::Fixed(1.0),
            ..FitOptions::default()
        };
        let (l2, s2) = fit_layer_ls(&d, 1, grid_1d(5, 3), &fixed).unwrap();
        assert!(s2.train_rmse <= 1e-12);
        assert!(l2.spline_tensor().iter().all(|c| c.abs() < 1e-10));
        assert_eq!(layer.n_o(), 1);
    }

    #[test]
    fn zero_target_gives_zero_coefficients() {
        let d = data_1d(|_| 0.0, 50);
        let (layer, _) = fit_layer_ls(&d, 1, grid_1d(4, 2), &FitOptions::default()).unwrap();
        assert!(layer.spline_tensor().iter().all(|&c| c == 0.0));
        assert!(layer.w_b().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn shape_errors() {
        let d = data_1d(|x| x, 20);
        assert!(matches!(
            fit_layer_ls(&d, 2, grid_1d(3, 1), &FitOptions::default()),
            Err(Error::ShapeMismatch(_))
        ));
        let g2 = GridMatrix::uniform(2, -1.0, 1.0, 3, 1).unwrap();
        assert!(fit_layer_ls(&d, 1, g2, &FitOptions::default()).is_err());
    }

    #[test]
    fn csv_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, "x1,x2,y\n0.1,0.2,1\n0.3,0.4,2\n").unwrap();
        let d = Dataset::from_csv(&p, 1).unwrap();
        assert_eq!(d.inputs, vec![vec![0.1, 0.2], vec![0.3, 0.4]]);
        assert_eq!(d.targets, vec![vec![1.0], vec![2.0]]);
        std::fs::write(&p, "0.1,0.2,1\n0.3,oops,2\n").unwrap();
        assert!(matches!(Dataset::from_csv(&p, 1), Err(Error::CorruptFile(_))));
    }
}
