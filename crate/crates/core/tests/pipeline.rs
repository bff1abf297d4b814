use hekan_core::approx::{Comparator, ComparatorMode};
use hekan_core::he::{backend_from_config, Backend, BackendConfig, Cleartext, Noisy};
use hekan_core::inference::{bench_compare, infer, infer_batch, BenchConfig, PathKind, PipelineConfig};
use hekan_core::model::synth::{random_model, SynthSpec};
use hekan_core::model::{load_model, model_forward_plain, save_model, ForwardMode};
use hekan_core::par::ExecMode;
use hekan_core::spline::{bspline_basis_he, repeat_pack_scaled, GridMatrix};

fn cfg(path: PathKind, slots: usize) -> PipelineConfig {
    PipelineConfig::new(BackendConfig::new(slots, 20), path, ComparatorMode::Composite)
}

#[test]
fn noise_round_trip_monte_carlo() {
    // 10^4 trials of 16 slots each
    let mut be = Noisy::new(BackendConfig::new(16, 1).with_noise(1e-8, 42)).unwrap();
    let v: Vec<f64> = (0..16).map(|i| i as f64 * 0.1 - 0.8).collect();
    let mut bad = 0usize;
    let trials = 10_000;
    for _ in 0..trials {
        let ct = be.encrypt(&v, 1).unwrap();
        bad += be.decrypt(&ct).iter().zip(&v).filter(|(a, b)| (*a - *b).abs() > 1e-6).count();
    }
    assert!((bad as f64) / ((trials * 16) as f64) <= 1e-3, "{bad} slots over 1e-6");
}

#[test]
fn two_layer_model_cleartext_and_noisy() {
    let (m, xs) = random_model(21, &SynthSpec::new(&[8, 4, 2], 5, 3)).unwrap();
    let cmp = Comparator::composite();
    let clear = cfg(PathKind::Lazy, 1024);
    let mut noisy = clear.clone();
    noisy.backend = noisy.backend.with_noise(1e-8, 3);
    let a = infer_batch(&m, &xs[..6], &clear).unwrap();
    let b = infer_batch(&m, &xs[..6], &noisy).unwrap();
    for ((x, ra), rb) in xs.iter().zip(&a).zip(&b) {
        let want = model_forward_plain(&m, x, ForwardMode::Mirrored(&cmp)).unwrap();
        for ((a, b), w) in ra.output.iter().zip(&rb.output).zip(&want) {
            assert!((a - w).abs() <= 1e-9);
            assert!((b - w).abs() <= 1e-4, "{b} vs {w}");
        }
    }
}

#[test]
fn one_layer_model_equals_layer_forward() {
    let (m, xs) = random_model(22, &SynthSpec::new(&[5, 3], 4, 2)).unwrap();
    let c = cfg(PathKind::Naive, 256);
    let r = infer(&m, &xs[0], &c).unwrap();
    let mut be = Cleartext::new(c.backend.clone()).unwrap();
    let ct = be.encrypt(&xs[0], 20).unwrap();
    let out = hekan_core::inference::layer_forward_he(&mut be, &m.layers()[0], &ct, &c).unwrap();
    assert_eq!(&be.decrypt(&out)[..3], &r.output[..]);
    assert_eq!(r.stats.layers.len(), 1);
    assert_eq!(r.stats.total.rotations, be.counter().rotations);
}

#[test]
fn repeated_runs_are_deterministic() {
    let (m, xs) = random_model(23, &SynthSpec::new(&[6, 4], 3, 2)).unwrap();
    let mut c = cfg(PathKind::Lazy, 256);
    c.backend = c.backend.with_noise(1e-8, 11);
    let a = infer(&m, &xs[1], &c).unwrap();
    let b = infer(&m, &xs[1], &c).unwrap();
    assert_eq!(a.output, b.output);
    assert!(a.stats.same_counts(&b.stats));
    let seq = infer_batch(&m, &xs, &PipelineConfig { exec: ExecMode::Sequential, ..c.clone() }).unwrap();
    let par = infer_batch(&m, &xs, &PipelineConfig { exec: ExecMode::Parallel, ..c }).unwrap();
    assert_eq!(
        seq.iter().map(|r| r.output.clone()).collect::<Vec<_>>(),
        par.iter().map(|r| r.output.clone()).collect::<Vec<_>>()
    );
}

#[test]
fn basis_stage_counts_do_not_depend_on_g() {
    let n = 16;
    let k = 3;
    let mut seen = None;
    for g in 2..=20 {
        let grid = GridMatrix::uniform(n, -1.0, 1.0, g, k).unwrap();
        let mut be = backend_from_config(&BackendConfig::new(1 << 12, 20)).unwrap();
        let xs: Vec<f64> = (0..n).map(|i| -0.9 + 0.11 * i as f64).collect();
        let ct = be.encrypt(&xs, 20).unwrap();
        let xp = repeat_pack_scaled(be.as_mut(), &ct, n, grid.intervals(), grid.scale()).unwrap();
        let before = be.counter();
        bspline_basis_he(be.as_mut(), &xp, &grid, &Comparator::composite()).unwrap();
        let c = be.counter() - before;
        let key = (c.rotations, c.ct_mults, c.pt_mults, c.max_depth_consumed - before.max_depth_consumed);
        match seen {
            None => seen = Some(key),
            Some(s) => assert_eq!(s, key, "g = {g}"),
        }
    }
}

#[test]
fn bench_rows_for_two_configs() {
    let cfgs: Vec<BenchConfig> = serde_json::from_str(
        r#"[{"shape": {"n_i": 64, "g": 3, "k": 2}, "path": "lazy"},
            {"shape": {"n_i": 64, "g": 3, "k": 2}, "path": "naive"}]"#,
    )
    .unwrap();
    let r = bench_compare(None, &[], &cfgs, 5, ExecMode::Parallel).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert!(r.rows[0].speedup_vs_naive_counts > 1.0);
    let again = bench_compare(None, &[], &cfgs, 5, ExecMode::Sequential).unwrap();
    assert_eq!(r.rows[0].rotations, again.rows[0].rotations);
    assert_eq!(r.rows[1].pt_mults, again.rows[1].pt_mults);
}

#[test]
fn saved_model_infers_identically() {
    let (m, xs) = random_model(24, &SynthSpec::new(&[4, 3, 2], 4, 3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("model.json");
    save_model(&m, &p).unwrap();
    let back = load_model(&p).unwrap();
    let c = cfg(PathKind::Lazy, 256);
    assert_eq!(infer(&m, &xs[0], &c).unwrap().output, infer(&back, &xs[0], &c).unwrap().output);
}
