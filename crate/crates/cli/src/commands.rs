use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hekan_core::approx::{
    default_samples, fit_ols, fit_remez, fit_report, fit_weighted_ls, mean_std, range_from_stats, silu, Comparator,
    FitReport, Polynomial, WeightScheme,
};
use hekan_core::he::BackendConfig;
use hekan_core::inference::{bench_compare, infer_batch, BenchConfig, InferenceStats, LayerStats, PipelineConfig};
use hekan_core::model::{
    fit_layer_ls, load_model, model_forward_plain, read_csv_rows, save_model, Dataset, FitOptions, ForwardMode,
    KanModel,
};
use hekan_core::par::ExecMode;
use hekan_core::spline::GridMatrix;
use hekan_core::Error;
use serde::Serialize;

use crate::{
    BenchArgs, Cli, Command, CompareArgs, FitActivationArgs, FitLayerArgs, HeArgs, InferArgs, Method, Mode,
};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::FitActivation(a) => fit_activation(a),
        Command::FitLayer(a) => fit_layer(a),
        Command::Infer(a) => infer(a, cli.seed),
        Command::Bench(a) => bench(a, cli.seed.unwrap_or(0)),
        Command::Compare(a) => compare(a, cli.seed),
    }
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(f), v)?;
    Ok(())
}

/// `poly.json` -> `poly.report.csv`
pub fn report_path(out: &Path) -> PathBuf {
    out.with_extension("report.csv")
}

fn fit_activation(a: &FitActivationArgs) -> Result<()> {
    let (lo, hi) = match a.bound {
        Some(b) => (-b, b),
        None => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let (mu, sigma) = match (&a.samples, a.mu, a.sigma) {
        (Some(p), _, _) => {
            let xs: Vec<f64> = read_csv_rows(p)?.into_iter().flatten().collect();
            mean_std(&xs)?
        }
        (None, Some(mu), Some(sigma)) => (mu, sigma),
        _ => return Err(Error::InvalidConfig("give --samples or both --mu and --sigma".into()).into()),
    };
    let range = range_from_stats(mu, sigma, lo, hi, a.factor)?;
    let weights = WeightScheme::for_range(&range);
    let n = default_samples(a.degree);
    let p: Polynomial = match a.method {
        Method::Wls => fit_weighted_ls(silu, &range, a.degree, &weights, n)?,
        Method::Ols => fit_ols(silu, &range, a.degree, n)?,
        Method::Remez => fit_remez(silu, &range, a.degree)?,
    };
    let report = fit_report(&p, silu, &range, &weights);
    println!(
        "range [{:.6}, {:.6}] (mu {mu:.6}, sigma {sigma:.6}), degree {}",
        range.lo, range.hi, a.degree
    );
    println!(
        "rmse uniform {:.3e}, inner {:.3e}, weighted {:.3e}, max error {:.3e}",
        report.rmse_uniform, report.rmse_inner, report.rmse_weighted, report.max_error
    );
    if let Some(out) = &a.out {
        write_json(out, &p)?;
        write_report(&report_path(out), &report)?;
    }
    Ok(())
}

fn write_report(path: &Path, r: &FitReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.serialize(r)?;
    w.flush()?;
    Ok(())
}

fn fit_layer(a: &FitLayerArgs) -> Result<()> {
    let data = Dataset::from_csv(&a.data, a.targets)?;
    let grid = GridMatrix::uniform(data.input_dim(), a.lo, a.hi, a.g, a.k)?;
    let opts = FitOptions {
        ridge: a.ridge,
        silu_degree: a.silu_degree,
        ..FitOptions::default()
    };
    let (layer, summary) = fit_layer_ls(&data, a.targets, grid, &opts)?;
    println!(
        "fitted {} -> {} layer (g {}, k {}) on {} samples, train rmse {:.3e}",
        layer.n_i(),
        layer.n_o(),
        layer.g(),
        layer.k(),
        summary.samples,
        summary.train_rmse
    );
    if let Some(out) = &a.out {
        save_model(&KanModel::single(layer), out)?;
    }
    Ok(())
}

fn pipeline_config(h: &HeArgs, seed: Option<u64>) -> Result<PipelineConfig> {
    let mut backend = match &h.backend {
        Some(p) => BackendConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => BackendConfig::default(),
    };
    if let Some(s) = seed {
        backend.rng_seed = s;
    }
    let mut cfg = PipelineConfig::new(backend, h.path.into(), h.comparator.into());
    cfg.bootstrap = !h.no_bootstrap;
    Ok(cfg)
}

fn load_inputs(model: &KanModel, path: &Path) -> Result<Vec<Vec<f64>>> {
    let xs = read_csv_rows(path)?;
    if let Some((j, x)) = xs.iter().enumerate().find(|(_, x)| x.len() != model.input_dim()) {
        return Err(Error::ShapeMismatch(format!(
            "input row {j} has {} values, model takes {}",
            x.len(),
            model.input_dim()
        ))
        .into());
    }
    Ok(xs)
}

#[derive(Serialize)]
struct InferOutput {
    mode: String,
    outputs: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<Vec<InferenceStats>>,
}

fn run_plain(model: &KanModel, xs: &[Vec<f64>], mode: ForwardMode<'_>) -> Result<Vec<Vec<f64>>> {
    Ok(xs
        .iter()
        .map(|x| model_forward_plain(model, x, mode))
        .collect::<hekan_core::Result<_>>()?)
}

fn run_he(model: &KanModel, xs: &[Vec<f64>], cfg: &PipelineConfig) -> Result<(Vec<Vec<f64>>, Vec<InferenceStats>)> {
    let plan = cfg.plan(model)?;
    println!("{plan}");
    let rs = infer_batch(model, xs, cfg)?;
    Ok(rs.into_iter().map(|r| (r.output, r.stats)).unzip())
}

fn infer(a: &InferArgs, seed: Option<u64>) -> Result<()> {
    let model = load_model(&a.model)?;
    let xs = load_inputs(&model, &a.input)?;
    let cfg = pipeline_config(&a.he, seed)?;
    let cmp = Comparator::from_mode(cfg.comparator);
    let (mode, outputs, stats) = match a.mode {
        Mode::PlainExact => ("plain-exact", run_plain(&model, &xs, ForwardMode::Exact)?, None),
        Mode::PlainMirrored => ("plain-mirrored", run_plain(&model, &xs, ForwardMode::Mirrored(&cmp))?, None),
        Mode::He => {
            let (o, s) = run_he(&model, &xs, &cfg)?;
            let mut t = LayerStats::default();
            for r in &s {
                t += r.total;
            }
            println!(
                "{} inputs: {} rotations, {} ct mults, {} pt mults, {} refreshes",
                xs.len(),
                t.rotations,
                t.ct_mults,
                t.pt_mults,
                t.refreshes
            );
            ("he", o, Some(s))
        }
    };
    for (j, y) in outputs.iter().enumerate() {
        let cells: Vec<String> = y.iter().map(|v| format!("{v:.9}")).collect();
        println!("{j}: {}", cells.join(" "));
    }
    if let Some(out) = &a.out {
        write_json(
            out,
            &InferOutput {
                mode: mode.into(),
                outputs,
                stats,
            },
        )?;
    }
    Ok(())
}

fn bench(a: &BenchArgs, seed: u64) -> Result<()> {
    let text = std::fs::read_to_string(&a.configs).with_context(|| format!("reading {}", a.configs.display()))?;
    let cfgs: Vec<BenchConfig> = serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let model = a.model.as_deref().map(load_model).transpose()?;
    let inputs = match (&model, &a.input) {
        (Some(m), Some(p)) => load_inputs(m, p)?,
        _ => Vec::new(),
    };
    let report = bench_compare(model.as_ref(), &inputs, &cfgs, seed, ExecMode::default())?;
    println!(
        "{:<24} {:>6} {:>10} {:>9} {:>9} {:>6} {:>9}",
        "config", "path", "rotations", "ct_mults", "pt_mults", "depth", "speedup"
    );
    for r in &report.rows {
        println!(
            "{:<24} {:>6} {:>10} {:>9} {:>9} {:>6} {:>9.3}",
            r.config,
            format!("{:?}", r.path).to_lowercase(),
            r.rotations,
            r.ct_mults,
            r.pt_mults,
            r.depth,
            r.speedup_vs_naive_counts
        );
    }
    if let Some(out) = &a.out {
        if out.extension().is_some_and(|e| e == "json") {
            std::fs::write(out, report.to_json()?)?;
        } else {
            let f = File::create(out).with_context(|| format!("creating {}", out.display()))?;
            report.write_csv(BufWriter::new(f))?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Diff {
    pub pair: String,
    pub max_abs: f64,
    pub rmse: f64,
}

fn diff(pair: &str, a: &[Vec<f64>], b: &[Vec<f64>]) -> Diff {
    let errs: Vec<f64> = a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| x - y).collect();
    let n = errs.len().max(1) as f64;
    Diff {
        pair: pair.into(),
        max_abs: errs.iter().fold(0.0, |m: f64, e| m.max(e.abs())),
        rmse: (errs.iter().map(|e| e * e).sum::<f64>() / n).sqrt(),
    }
}

fn compare(a: &CompareArgs, seed: Option<u64>) -> Result<()> {
    let model = load_model(&a.model)?;
    let xs = load_inputs(&model, &a.input)?;
    let cfg = pipeline_config(&a.he, seed)?;
    let cmp = Comparator::from_mode(cfg.comparator);
    let exact = run_plain(&model, &xs, ForwardMode::Exact)?;
    let mirrored = run_plain(&model, &xs, ForwardMode::Mirrored(&cmp))?;
    let (he, _) = run_he(&model, &xs, &cfg)?;
    let diffs = vec![
        diff("exact-mirrored", &exact, &mirrored),
        diff("mirrored-he", &mirrored, &he),
        diff("exact-he", &exact, &he),
    ];
    for d in &diffs {
        println!("{:<16} max {:.3e}  rmse {:.3e}", d.pair, d.max_abs, d.rmse);
    }
    if let Some(out) = &a.out {
        write_json(out, &diffs)?;
    }
    Ok(())
}
