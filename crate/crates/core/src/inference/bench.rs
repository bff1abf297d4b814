//! Counter-based comparison of pipeline configurations.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pipeline::{infer, PathKind, PipelineConfig};
use super::stats::InferenceStats;
use crate::approx::ComparatorMode;
use crate::error::{Error, Result};
use crate::he::BackendConfig;
use crate::model::synth::{random_inputs, random_model, SynthSpec};
use crate::model::KanModel;
use crate::par::{self, ExecMode};

/// Single-layer synthetic model shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchShape {
    pub n_i: usize,
    pub g: usize,
    pub k: usize,
    #[serde(default = "ten")]
    pub n_o: usize,
}

fn ten() -> usize {
    10
}

/// One benchmark row. Without a `shape` the caller's model is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub shape: Option<BenchShape>,
    #[serde(default)]
    pub path: PathKind,
    #[serde(default)]
    pub comparator: ComparatorMode,
    #[serde(default)]
    pub backend: Option<BackendConfig>,
    #[serde(default)]
    pub bsgs_split: Option<(usize, usize)>,
}

impl BenchConfig {
    pub fn shape(n_i: usize, g: usize, k: usize, path: PathKind) -> Self {
        BenchConfig {
            name: None,
            shape: Some(BenchShape { n_i, g, k, n_o: 10 }),
            path,
            comparator: ComparatorMode::Composite,
            backend: None,
            bsgs_split: None,
        }
    }

    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match self.shape {
            Some(s) => format!("({},{},{})", s.n_i, s.g, s.k),
            None => "model".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub config: String,
    pub path: PathKind,
    pub rotations: u64,
    pub ct_mults: u64,
    pub pt_mults: u64,
    pub depth: usize,
    pub wall_ms: f64,
    /// Naive-path rotations plus multiplications over this row's.
    pub speedup_vs_naive_counts: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// Stats of the first input (counters do not depend on the values) with
/// wall time averaged over all inputs.
fn run(model: &KanModel, inputs: &[Vec<f64>], cfg: &PipelineConfig) -> Result<InferenceStats> {
    let mut first: Option<InferenceStats> = None;
    let mut wall = 0.0;
    for x in inputs {
        let r = infer(model, x, cfg)?;
        wall += r.stats.total.wall_time_ms;
        first.get_or_insert(r.stats);
    }
    let mut s = first.ok_or(Error::EmptySamples)?;
    s.total.wall_time_ms = wall / inputs.len() as f64;
    Ok(s)
}

fn bench_one(
    cfg: &BenchConfig,
    model: Option<&KanModel>,
    inputs: &[Vec<f64>],
    seed: u64,
) -> Result<BenchRow> {
    let (owned, own_inputs);
    let (m, xs): (&KanModel, &[Vec<f64>]) = match (cfg.shape, model) {
        (Some(s), _) => {
            let mut spec = SynthSpec::new(&[s.n_i, s.n_o], s.g, s.k);
            spec.calibration = 8;
            owned = random_model(seed, &spec)?.0;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            own_inputs = random_inputs(&mut rng, inputs.len().max(1), s.n_i);
            (&owned, &own_inputs)
        }
        (None, Some(m)) => (m, inputs),
        (None, None) => {
            return Err(Error::InvalidConfig(format!(
                "config {} has no shape and no model was given",
                cfg.label()
            )))
        }
    };
    let pipeline = PipelineConfig {
        comparator: cfg.comparator,
        path: cfg.path,
        backend: cfg.backend.clone().unwrap_or_default(),
        bsgs_split: cfg.bsgs_split,
        bootstrap: true,
        exec: ExecMode::Sequential,
    };
    let stats = run(m, xs, &pipeline)?;
    let naive = if cfg.path == PathKind::Naive {
        stats.clone()
    } else {
        let c = PipelineConfig {
            path: PathKind::Naive,
            ..pipeline.clone()
        };
        run(m, &xs[..1], &c)?
    };
    let t = stats.total;
    Ok(BenchRow {
        config: cfg.label(),
        path: cfg.path,
        rotations: t.rotations,
        ct_mults: t.ct_mults,
        pt_mults: t.pt_mults,
        depth: t.depth_consumed,
        wall_ms: t.wall_time_ms,
        speedup_vs_naive_counts: naive.total.weighted_ops() as f64 / t.weighted_ops() as f64,
    })
}

/// One row per config. Configs with a `shape` build their own seeded
/// single-layer model and `inputs.len()` random inputs; the rest run
/// `model` on `inputs`. Configs run concurrently under `exec`.
pub fn bench_compare(
    model: Option<&KanModel>,
    inputs: &[Vec<f64>],
    cfgs: &[BenchConfig],
    seed: u64,
    exec: ExecMode,
) -> Result<BenchReport> {
    if cfgs.is_empty() {
        return Err(Error::InvalidConfig("no bench configs".into()));
    }
    if inputs.is_empty() && cfgs.iter().any(|c| c.shape.is_none()) {
        return Err(Error::EmptySamples);
    }
    let rows = par::try_map(exec, cfgs, |c| bench_one(c, model, inputs, seed))?;
    Ok(BenchReport { rows })
}

impl BenchReport {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(path: PathKind) -> BenchConfig {
        BenchConfig {
            backend: Some(BackendConfig::new(256, 20)),
            ..BenchConfig::shape(8, 3, 2, path)
        }
    }

    #[test]
    fn rows_and_csv() {
        let cfgs = [small(PathKind::Lazy), small(PathKind::Naive)];
        let r = bench_compare(None, &[], &cfgs, 1, ExecMode::Parallel).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows[0].speedup_vs_naive_counts > 1.0);
        assert_eq!(r.rows[1].speedup_vs_naive_counts, 1.0);
        assert!(r.rows[0].rotations < r.rows[1].rotations);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "config,path,rotations,ct_mults,pt_mults,depth,wall_ms,speedup_vs_naive_counts"
        );
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn deterministic_counts() {
        let a = bench_compare(None, &[], &[small(PathKind::Lazy)], 4, ExecMode::Sequential).unwrap();
        let b = bench_compare(None, &[], &[small(PathKind::Lazy)], 4, ExecMode::Sequential).unwrap();
        let strip = |r: &BenchRow| BenchRow { wall_ms: 0.0, ..r.clone() };
        assert_eq!(strip(&a.rows[0]), strip(&b.rows[0]));
    }

    #[test]
    fn empty_config_list() {
        assert!(bench_compare(None, &[], &[], 0, ExecMode::Sequential).is_err());
    }

    #[test]
    fn config_json() {
        let c: BenchConfig =
            serde_json::from_str(r#"{"shape": {"n_i": 64, "g": 3, "k": 2}, "path": "naive"}"#).unwrap();
        assert_eq!(c.shape.unwrap().n_o, 10);
        assert_eq!(c.path, PathKind::Naive);
        assert_eq!(c.comparator, ComparatorMode::Composite);
        assert!(serde_json::from_str::<BenchConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
