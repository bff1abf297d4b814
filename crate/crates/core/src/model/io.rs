//! Versioned JSON model format.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ActStats, KanLayer, KanModel};
use crate::approx::Polynomial;
use crate::error::{Error, Result};
use crate::spline::{GridSpec, UniformGrid};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    input_shape: [usize; 3],
    layers: Vec<LayerFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct LayerFile {
    n_i: usize,
    n_o: usize,
    g: usize,
    k: usize,
    R: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uniform_grid: Option<UniformGrid>,
    W_b: Vec<Vec<f64>>,
    S: SplineField,
    silu_poly: Polynomial,
    act_stats: ActStats,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
#[allow(non_snake_case)]
enum SplineField {
    Tensor(Vec<Vec<Vec<f64>>>),
    Factored { W_s: Vec<Vec<f64>>, C: Vec<Vec<f64>> },
}

fn matrix(rows: &[Vec<f64>], r: usize, c: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(Error::SchemaMismatch(format!("{what} must be {r}×{c}")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl LayerFile {
    fn of(layer: &KanLayer) -> Self {
        let (n_i, n_o) = (layer.n_i(), layer.n_o());
        let w = layer.w_b();
        LayerFile {
            n_i,
            n_o,
            g: layer.g(),
            k: layer.k(),
            R: layer.grid().bound(),
            grid: Some(GridSpec::of(layer.grid())),
            uniform_grid: None,
            W_b: (0..n_o).map(|o| (0..n_i).map(|i| w[(o, i)]).collect()).collect(),
            S: SplineField::Tensor(
                (0..n_o)
                    .map(|o| (0..n_i).map(|i| layer.edge_coeffs(o, i).to_vec()).collect())
                    .collect(),
            ),
            silu_poly: layer.silu_poly().clone(),
            act_stats: layer.act_stats(),
        }
    }

    fn build(self) -> Result<KanLayer> {
        let LayerFile {
            n_i,
            n_o,
            g,
            k,
            R,
            grid,
            uniform_grid,
            W_b,
            S,
            silu_poly,
            act_stats,
        } = self;
        let spec = match (grid, uniform_grid) {
            (Some(s), None) => s,
            (None, Some(u)) => GridSpec::Uniform { uniform: u },
            (None, None) => return Err(Error::SchemaMismatch("layer has no grid".into())),
            (Some(_), Some(_)) => {
                return Err(Error::SchemaMismatch("layer has both grid and uniform_grid".into()))
            }
        };
        let grid = spec.build(n_i, g, k, Some(R))?;
        let gk = g + k;
        let w_b = matrix(&W_b, n_o, n_i, "W_b")?;
        let s = match S {
            SplineField::Tensor(t) => {
                if t.len() != n_o || t.iter().any(|r| r.len() != n_i || r.iter().any(|c| c.len() != gk)) {
                    return Err(Error::SchemaMismatch(format!("S must be {n_o}×{n_i}×{gk}")));
                }
                t.into_iter().flatten().flatten().collect()
            }
            SplineField::Factored { W_s, C } => {
                let ws = matrix(&W_s, n_o, n_i, "W_s")?;
                let c = matrix(&C, n_i, gk, "C")?;
                let mut s = Vec::with_capacity(n_o * n_i * gk);
                for o in 0..n_o {
                    for i in 0..n_i {
                        for m in 0..gk {
                            s.push(ws[(o, i)] * c[(i, m)]);
                        }
                    }
                }
                s
            }
        };
        KanLayer::new(w_b, s, grid, silu_poly, act_stats).map_err(|e| match e {
            Error::DimensionMismatch(m) => Error::SchemaMismatch(m),
            e => e,
        })
    }
}

fn classify(e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match e.classify() {
        Category::Data => Error::SchemaMismatch(e.to_string()),
        Category::Io => Error::Io(e.to_string()),
        Category::Syntax | Category::Eof => Error::CorruptFile(e.to_string()),
    }
}

pub fn model_to_json(model: &KanModel) -> Result<String> {
    let file = ModelFile {
        version: MODEL_VERSION,
        input_shape: model.input_shape(),
        layers: model.layers().iter().map(LayerFile::of).collect(),
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Io(e.to_string()))
}

pub fn model_from_json(s: &str) -> Result<KanModel> {
    let v: serde_json::Value = serde_json::from_str(s).map_err(classify)?;
    match v.get("version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(MODEL_VERSION) => {}
        Some(v) => return Err(Error::SchemaMismatch(format!("unsupported model version {v}"))),
        None => return Err(Error::SchemaMismatch("missing model version".into())),
    }
    let file: ModelFile = serde_json::from_value(v).map_err(classify)?;
    let layers = file
        .layers
        .into_iter()
        .map(LayerFile::build)
        .collect::<Result<Vec<_>>>()?;
    KanModel::new(layers, file.input_shape).map_err(|e| match e {
        Error::DimensionMismatch(m) | Error::InvalidConfig(m) => Error::SchemaMismatch(m),
        e => e,
    })
}

pub fn save_model(model: &KanModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<KanModel> {
    model_from_json(&std::fs::read_to_string(path)?)
}
