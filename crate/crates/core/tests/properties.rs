use hekan_core::approx::{
    fit_weighted_ls, poly_comp, silu, ApproxRange, Comparator, ComparatorMode, Polynomial, WeightScheme,
};
use hekan_core::he::{Backend, BackendConfig, Cleartext, PlainVector};
use hekan_core::inference::{infer, DepthPlan, PathKind, PipelineConfig};
use hekan_core::model::synth::{random_model, SynthSpec};
use hekan_core::model::{fit_layer_ls, model_forward_plain, phi, Dataset, FitOptions, ForwardMode};
use hekan_core::par::ExecMode;
use hekan_core::spline::{
    bspline_basis_plain, fuse_weights, gen_permutation, repeat_pack, GridMatrix,
};
use hekan_core::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn backend(slots: usize) -> Cleartext {
    Cleartext::new(BackendConfig::new(slots, 20)).unwrap()
}

fn vec_of(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotation_group_law(v in vec_of(16), s in -15isize..16, t in -15isize..16) {
        let mut be = backend(16);
        let ct = be.encrypt(&v, 20).unwrap();
        let a = be.rotate(&ct, s).unwrap();
        let ab = be.rotate(&a, t).unwrap();
        let st = (s + t).rem_euclid(16);
        let c = be.rotate(&ct, st).unwrap();
        prop_assert_eq!(be.decrypt(&ab), be.decrypt(&c));
        let back = be.rotate(&a, -s).unwrap();
        prop_assert_eq!(be.decrypt(&back), be.decrypt(&ct));
    }

    #[test]
    fn cleartext_is_exact(a in vec_of(8), b in vec_of(8), p in vec_of(8), t in 0isize..8) {
        let mut be = backend(8);
        let ca = be.encrypt(&a, 20).unwrap();
        let cb = be.encrypt(&b, 20).unwrap();
        let pv = PlainVector::from_full(p.clone());
        let prod = be.mul(&ca, &cb).unwrap();
        let sum = be.add_plain(&prod, &pv).unwrap();
        let rot = be.rotate(&sum, t).unwrap();
        let out = be.mul_plain(&rot, &pv).unwrap();
        let raw: Vec<f64> = (0..8)
            .map(|j| {
                let s = (j + t as usize) % 8;
                (a[s] * b[s] + p[s]) * p[j]
            })
            .collect();
        prop_assert_eq!(be.decrypt(&out), raw);
        prop_assert_eq!(out.level(), 18);
    }

    #[test]
    fn comparator_antisymmetry(a in prop::collection::vec(-0.5f64..0.5, 32), b in prop::collection::vec(-0.5f64..0.5, 32)) {
        let cmp = Comparator::composite();
        let mut be = backend(32);
        let ca = be.encrypt(&a, 20).unwrap();
        let cb = be.encrypt(&b, 20).unwrap();
        let ab = poly_comp(&mut be, &ca, &cb, &cmp).unwrap();
        let ba = poly_comp(&mut be, &cb, &ca, &cmp).unwrap();
        let (ab, ba) = (be.decrypt(&ab), be.decrypt(&ba));
        for j in 0..32 {
            prop_assert!((ab[j] + ba[j] - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn permutation_matrix_is_orthogonal(n_r in 1usize..9, n_c in 1usize..9) {
        let p = gen_permutation(n_r, n_c).unwrap();
        let m = p.to_matrix();
        prop_assert_eq!(&m * m.transpose(), DMatrix::identity(p.dim(), p.dim()));
        let v: Vec<f64> = (0..p.dim()).map(|i| i as f64).collect();
        let back = p.inverse().apply(&p.apply(&v).unwrap()).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn fused_weights_commute(n_r in 1usize..6, n_c in 1usize..6, n_o in 1usize..4, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = gen_permutation(n_r, n_c).unwrap();
        let d = p.dim();
        let w = DMatrix::from_fn(n_o, d, |_, _| rng.random_range(-1.0..1.0));
        let v = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let wf = fuse_weights(&w, &p).unwrap();
        let pv = DVector::from_vec(p.apply(v.as_slice()).unwrap());
        let lhs = &wf * &v;
        let rhs = &w * pv;
        prop_assert!((lhs - rhs).amax() <= 1e-12);
    }

    #[test]
    fn partition_of_unity(x in -0.999f64..0.999, g in 1usize..12, k in 0usize..4) {
        let grid = GridMatrix::uniform(1, -1.0, 1.0, g, k).unwrap();
        let b = bspline_basis_plain(x, grid.knots(0), k).unwrap();
        prop_assert_eq!(b.len(), g + k);
        prop_assert!(b.iter().all(|&v| v >= -1e-15));
        prop_assert!((b.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn repeat_pack_law(n in 1usize..9, copies in 1usize..20, x in vec_of(8)) {
        let slots = 256;
        let mut be = backend(slots);
        let ct = be.encrypt(&x[..n], 20).unwrap();
        let p = repeat_pack(&mut be, &ct, n, copies).unwrap();
        let out = be.decrypt(&p.ct);
        for j in 0..n * copies {
            prop_assert_eq!(out[j], x[j % n]);
        }
        let c = be.counter();
        prop_assert_eq!(c.rotations, (copies as f64).log2().ceil() as u64);
        prop_assert_eq!(c.pt_mults, 1);
    }

    #[test]
    fn phi_is_linear_in_weights(x in -0.99f64..0.99, wb in -2.0f64..2.0, ws in -2.0f64..2.0, c in prop::collection::vec(-1.0f64..1.0, 6), lam in -3.0f64..3.0) {
        let grid = GridMatrix::uniform(1, -1.0, 1.0, 3, 3).unwrap();
        let t = grid.knots(0);
        let base = phi(x, wb, ws, &c, t, 3).unwrap();
        let scaled: Vec<f64> = c.iter().map(|v| v * lam).collect();
        let both = phi(x, lam * wb, ws, &scaled, t, 3).unwrap();
        prop_assert!((both - lam * base).abs() <= 1e-10 * (1.0 + base.abs() * lam.abs()));
        let split = phi(x, wb, 0.0, &c, t, 3).unwrap() + phi(x, 0.0, ws, &c, t, 3).unwrap();
        prop_assert!((split - base).abs() <= 1e-12);
        prop_assert!((phi(x, wb, 0.0, &c, t, 3).unwrap() - wb * silu(x)).abs() <= 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wls_is_locally_optimal(mu in -2.0f64..2.0, sigma in 0.3f64..2.0, j in 0usize..7, sign in prop::bool::ANY) {
        let range = ApproxRange { lo: mu - 5.0 * sigma, hi: mu + 5.0 * sigma, mu, sigma, degenerate: false };
        let w = WeightScheme::for_range(&range);
        let n = 400;
        let p = fit_weighted_ls(silu, &range, 6, &w, n).unwrap();
        let xs: Vec<f64> = (0..n).map(|i| range.lo + range.width() * i as f64 / (n - 1) as f64).collect();
        let loss = |q: &Polynomial| xs.iter().map(|&x| w.weight(x) * (q.eval(x) - silu(x)).powi(2)).sum::<f64>();
        let mut c = p.coeffs().to_vec();
        c.resize(7, 0.0);
        c[j] += if sign { 1e-3 } else { -1e-3 };
        prop_assert!(loss(&Polynomial::new(c)) >= loss(&p));
    }

    #[test]
    fn nested_grids_do_not_increase_residual(g in 1usize..6, k in 1usize..4, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<Vec<f64>> = (0..300).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
        let ys = xs.iter().map(|x| vec![(3.0 * x[0]).sin() + x[0] * x[0]]).collect();
        let data = Dataset::new(xs, ys).unwrap();
        let opts = FitOptions { ridge: 1e-12, ..FitOptions::default() };
        let fit = |g| fit_layer_ls(&data, 1, GridMatrix::uniform(1, -1.0, 1.0, g, k).unwrap(), &opts).unwrap().1.train_rmse;
        // refining g → 2g nests the spline spaces
        prop_assert!(fit(2 * g) <= fit(g) + 1e-9);
    }

    #[test]
    fn encrypted_matches_mirrored(seed in any::<u64>(), w0 in 1usize..10, w1 in 1usize..6, w2 in 1usize..4, g in 1usize..6, k in 0usize..4, lazy in prop::bool::ANY) {
        let (m, xs) = random_model(seed, &SynthSpec::new(&[w0, w1, w2], g, k)).unwrap();
        let path = if lazy { PathKind::Lazy } else { PathKind::Naive };
        let cfg = PipelineConfig { exec: ExecMode::Sequential, ..PipelineConfig::new(BackendConfig::new(512, 20), path, ComparatorMode::Composite) };
        let cmp = Comparator::composite();
        let r = infer(&m, &xs[0], &cfg).unwrap();
        let want = model_forward_plain(&m, &xs[0], ForwardMode::Mirrored(&cmp)).unwrap();
        for (a, b) in r.output.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
        }
        let plan = cfg.plan(&m).unwrap();
        prop_assert_eq!(r.stats.total.depth_consumed, plan.total_depth());
    }

    #[test]
    fn lazy_never_rotates_more(seed in any::<u64>(), n in 1usize..24, g in 1usize..8, k in 0usize..4) {
        let (m, xs) = random_model(seed, &SynthSpec::new(&[n, 3], g, k)).unwrap();
        let run = |path| {
            let cfg = PipelineConfig { exec: ExecMode::Sequential, ..PipelineConfig::new(BackendConfig::new(1024, 20), path, ComparatorMode::Exact) };
            infer(&m, &xs[0], &cfg).unwrap().stats.total
        };
        let (l, v) = (run(PathKind::Lazy), run(PathKind::Naive));
        prop_assert!(l.rotations <= v.rotations);
        prop_assert!(l.weighted_ops() < v.weighted_ops());
    }

    #[test]
    fn packing_feasibility_is_exact(n in 1usize..40, g in 1usize..10, k in 0usize..4) {
        let (m, _) = random_model(1, &SynthSpec::new(&[n, 2], g, k)).unwrap();
        let slots = 128;
        let r = DepthPlan::new(&m, PathKind::Lazy, &Comparator::Exact, slots, 20, 20, true);
        let needed = n * (g + 2 * k);
        if needed > slots {
            prop_assert!(matches!(r, Err(Error::PackingOverflow { .. })), "{:?}", r);
        } else {
            prop_assert!(r.is_ok(), "{:?}", r);
        }
    }
}
