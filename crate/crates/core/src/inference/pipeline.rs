use std::time::Instant;

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use super::matvec::bsgs_matvec;
use super::plan::DepthPlan;
use super::stats::{InferenceStats, LayerStats};
use crate::approx::{eval_poly_he_masked, Comparator, ComparatorMode};
use crate::error::{Error, Result};
use crate::he::{backend_from_config, Backend, BackendConfig, CipherText, PlainVector};
use crate::model::{KanLayer, KanModel};
use crate::par::{self, ExecMode};
use crate::spline::{bspline_basis_he, repeat_pack_scaled, tag_stage};

/// How the basis vector reaches the spline weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    /// One product with the pre-permuted weights `W′·P`.
    #[default]
    Lazy,
    /// Permutation applied homomorphically, then `W′`.
    Naive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub comparator: ComparatorMode,
    #[serde(default)]
    pub path: PathKind,
    #[serde(default)]
    pub backend: BackendConfig,
    /// `(baby, giant)`; must cover every matrix when set.
    #[serde(default)]
    pub bsgs_split: Option<(usize, usize)>,
    /// Refresh between layers when the next one would run out of levels.
    #[serde(default = "yes")]
    pub bootstrap: bool,
    #[serde(skip)]
    pub exec: ExecMode,
}

fn yes() -> bool {
    true
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            comparator: ComparatorMode::default(),
            path: PathKind::default(),
            backend: BackendConfig::default(),
            bsgs_split: None,
            bootstrap: true,
            exec: ExecMode::default(),
        }
    }
}

impl PipelineConfig {
    pub fn new(backend: BackendConfig, path: PathKind, comparator: ComparatorMode) -> Self {
        PipelineConfig {
            comparator,
            path,
            backend,
            ..Self::default()
        }
    }

    pub fn plan(&self, model: &KanModel) -> Result<DepthPlan> {
        let l = self.backend.depth_budget;
        DepthPlan::new(
            model,
            self.path,
            &Comparator::from_mode(self.comparator),
            self.backend.slot_count,
            l,
            l,
            self.bootstrap,
        )
    }
}

/// Encrypts an `h × w × c` tensor in raster order (`(y·w + x)·c + ch`) at
/// full level.
pub fn encrypt_input(be: &mut dyn Backend, tensor: &Array3<f64>, model: &KanModel) -> Result<CipherText> {
    let n1 = model.input_dim();
    if tensor.len() != n1 {
        let s = tensor.shape();
        return Err(Error::ShapeMismatch(format!(
            "{}×{}×{} tensor for a model taking {n1} inputs",
            s[0], s[1], s[2]
        )));
    }
    let v: Vec<f64> = tensor.iter().copied().collect();
    let l = be.depth_budget();
    be.encrypt(&v, l)
}

/// One layer on a ciphertext holding its `n_i` inputs in the first slots
/// (zero elsewhere). The output holds `n_o` values, zero elsewhere.
pub fn layer_forward_he(
    be: &mut dyn Backend,
    layer: &KanLayer,
    ct: &CipherText,
    cfg: &PipelineConfig,
) -> Result<CipherText> {
    let cmp = Comparator::from_mode(cfg.comparator);
    layer_forward_with(be, layer, ct, cfg, &cmp)
}

fn layer_forward_with(
    be: &mut dyn Backend,
    layer: &KanLayer,
    ct: &CipherText,
    cfg: &PipelineConfig,
    cmp: &Comparator,
) -> Result<CipherText> {
    let n = layer.n_i();
    let slots = be.slot_count();
    let grid = layer.grid();

    // SiLU branch from the unpacked input; the mask keeps the tail clean
    let mask = PlainVector::masked(1.0, n, slots);
    let act = tag_stage(eval_poly_he_masked(be, ct, layer.silu_poly(), &mask), "silu poly")?;
    let base = tag_stage(
        bsgs_matvec(be, layer.w_b(), &act, cfg.bsgs_split, cfg.exec),
        "silu matvec",
    )?;

    let packed = tag_stage(
        repeat_pack_scaled(be, ct, n, grid.intervals(), grid.scale()),
        "pack",
    )?;
    let basis = bspline_basis_he(be, &packed, grid, cmp)?;
    let spline = match cfg.path {
        PathKind::Lazy => {
            let wf = layer.fused_weights();
            tag_stage(bsgs_matvec(be, &wf, &basis.ct, cfg.bsgs_split, cfg.exec), "spline matvec")?
        }
        PathKind::Naive => {
            let p = layer.permutation();
            let permuted = tag_stage(
                bsgs_matvec(be, &p, &basis.ct, cfg.bsgs_split, cfg.exec),
                "permutation",
            )?;
            let wp = layer.w_prime();
            tag_stage(bsgs_matvec(be, &wp, &permuted, cfg.bsgs_split, cfg.exec), "spline matvec")?
        }
    };
    be.add(&base, &spline)
}

/// Runs every layer, refreshing where the plan says so. The plan is made
/// before the first operation, so infeasible budgets fail without work.
pub fn model_forward_he(
    be: &mut dyn Backend,
    model: &KanModel,
    ct: &CipherText,
    cfg: &PipelineConfig,
) -> Result<(CipherText, InferenceStats)> {
    let cmp = Comparator::from_mode(cfg.comparator);
    let budget = be.depth_budget();
    let plan = DepthPlan::new(
        model,
        cfg.path,
        &cmp,
        be.slot_count(),
        budget,
        ct.level(),
        cfg.bootstrap,
    )?;
    let mut cur = ct.clone();
    let mut layers = Vec::with_capacity(model.layers().len());
    for (layer, &refresh) in model.layers().iter().zip(&plan.refresh_before) {
        let t0 = Instant::now();
        let before = be.counter();
        if refresh {
            cur = be.refresh(&cur, budget)?;
        }
        let level_in = cur.level();
        let out = layer_forward_with(be, layer, &cur, cfg, &cmp)?;
        let diff = be.counter() - before;
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        layers.push(LayerStats::from_counter(&diff, level_in - out.level(), ms));
        cur = out;
    }
    Ok((cur, InferenceStats::from_layers(layers)))
}

/// Decrypted outputs of one encrypted inference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferenceResult {
    pub output: Vec<f64>,
    pub stats: InferenceStats,
}

/// Encrypts `x`, runs the model on a fresh backend and decrypts the first
/// `n_out` slots.
pub fn infer(model: &KanModel, x: &[f64], cfg: &PipelineConfig) -> Result<InferenceResult> {
    cfg.plan(model)?;
    let mut be = backend_from_config(&cfg.backend)?;
    let [h, w, c] = model.input_shape();
    let tensor = Array3::from_shape_vec((h, w, c), x.to_vec())
        .map_err(|_| Error::ShapeMismatch(format!("model takes {} inputs, got {}", h * w * c, x.len())))?;
    let ct = encrypt_input(be.as_mut(), &tensor, model)?;
    let (out, stats) = model_forward_he(be.as_mut(), model, &ct, cfg)?;
    let mut output = be.decrypt(&out);
    output.truncate(model.output_dim());
    Ok(InferenceResult { output, stats })
}

/// [`infer`] over many inputs; input `j` gets noise seed `rng_seed + j`.
/// Inputs run concurrently under `cfg.exec`.
pub fn infer_batch(model: &KanModel, xs: &[Vec<f64>], cfg: &PipelineConfig) -> Result<Vec<InferenceResult>> {
    cfg.plan(model)?;
    let items: Vec<(usize, &Vec<f64>)> = xs.iter().enumerate().collect();
    par::try_map(cfg.exec, &items, |&(j, x)| {
        let mut c = cfg.clone();
        c.backend.rng_seed = cfg.backend.rng_seed.wrapping_add(j as u64);
        infer(model, x, &c)
    })
}
