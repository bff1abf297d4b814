//! Remez exchange for minimax fits over a general Chebyshev system.

use nalgebra::{DMatrix, DVector};

use super::chebyshev::{chebyshev_to_polynomial, chebyshev_values, unit_map};
use super::{ApproxRange, Polynomial};
use crate::error::{Error, Result};
use crate::par::{self, ExecMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemezOptions {
    pub max_iter: usize,
    /// Stop once the reference errors agree to this relative spread.
    pub tol: f64,
    /// Spread still accepted when `max_iter` is hit.
    pub accept_spread: f64,
    /// Points in the error scan between exchanges.
    pub grid_points: usize,
}

impl Default for RemezOptions {
    fn default() -> Self {
        RemezOptions {
            max_iter: 80,
            tol: 1e-9,
            accept_spread: 0.1,
            grid_points: 20_000,
        }
    }
}

/// Result of a minimax fit in the caller's basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimax {
    pub coeffs: Vec<f64>,
    pub max_error: f64,
    /// `(max |e| - min |e_ref|) / max |e|` at the final reference.
    pub spread: f64,
    pub iterations: usize,
    pub reference: Vec<f64>,
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Minimax approximation of `f` on `[lo, hi]` by `Σ c_j φ_j`, where `basis`
/// writes `φ_0(x) .. φ_{n-1}(x)` into its slice. The basis must be a
/// Chebyshev (Haar) system on the interval.
pub fn remez<F, B>(f: F, basis: B, n: usize, lo: f64, hi: f64, opts: &RemezOptions) -> Result<Minimax>
where
    F: Fn(f64) -> f64 + Sync + Send,
    B: Fn(f64, &mut [f64]) + Sync + Send,
{
    if !(lo < hi) {
        return Err(Error::InvalidRange { lo, hi });
    }
    if n == 0 {
        return Err(Error::IllConditioned("empty basis".into()));
    }
    let m = n + 1;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut reference: Vec<f64> = (0..m)
        .map(|i| mid - half * (std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect();
    let g = opts.grid_points.max(4 * m);
    let grid: Vec<f64> = (0..g)
        .map(|i| mid - half * (std::f64::consts::PI * i as f64 / (g - 1) as f64).cos())
        .collect();
    let fscale = grid.iter().map(|&x| f(x).abs()).fold(0.0, f64::max).max(1e-300);

    let mut best: Option<Minimax> = None;
    let mut phi = vec![0.0; n];
    for iter in 1..=opts.max_iter {
        let mut a = DMatrix::<f64>::zeros(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        for (i, &x) in reference.iter().enumerate() {
            basis(x, &mut phi);
            for j in 0..n {
                a[(i, j)] = phi[j];
            }
            a[(i, n)] = if i % 2 == 0 { 1.0 } else { -1.0 };
            rhs[i] = f(x);
        }
        let sol = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::IllConditioned("singular remez system".into()))?;
        let coeffs: Vec<f64> = sol.as_slice()[..n].to_vec();
        let err = |x: f64| {
            let mut p = vec![0.0; n];
            basis(x, &mut p);
            f(x) - p.iter().zip(&coeffs).map(|(a, b)| a * b).sum::<f64>()
        };
        let e = par::map(ExecMode::Parallel, &grid, |&x| err(x));

        // one extremum per run of constant sign
        let mut ext: Vec<(f64, f64)> = Vec::new();
        let mut start = 0;
        let sign = |v: f64| v >= 0.0;
        for k in 1..=g {
            if k == g || sign(e[k]) != sign(e[start]) {
                let kmax = (start..k)
                    .max_by(|&p, &q| e[p].abs().total_cmp(&e[q].abs()))
                    .unwrap();
                let a0 = grid[kmax.saturating_sub(1)];
                let b0 = grid[(kmax + 1).min(g - 1)];
                let (xr, er) = golden_max(&|x| err(x).abs(), a0, b0);
                let pick = if er > e[kmax].abs() && sign(err(xr)) == sign(e[kmax]) {
                    (xr, err(xr))
                } else {
                    (grid[kmax], e[kmax])
                };
                ext.push(pick);
                start = k;
            }
        }
        let max_abs = ext.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        if max_abs <= 1e-13 * fscale {
            return Ok(Minimax {
                coeffs,
                max_error: max_abs,
                spread: 0.0,
                iterations: iter,
                reference,
            });
        }
        if ext.len() < m {
            // too few sign changes (e.g. a symmetric reference for an even
            // target): any m distinct points are a valid reference, so pad
            // with the largest remaining local maxima of |e|
            let mut cand: Vec<usize> = (0..g)
                .filter(|&k| {
                    let l = if k > 0 { e[k - 1].abs() } else { 0.0 };
                    let r = if k + 1 < g { e[k + 1].abs() } else { 0.0 };
                    e[k].abs() >= l && e[k].abs() >= r
                })
                .collect();
            cand.sort_by(|&p, &q| e[q].abs().total_cmp(&e[p].abs()));
            let pool = cand
                .into_iter()
                .map(|k| (grid[k], e[k]))
                .chain(reference.iter().map(|&x| (x, err(x))));
            for (x, v) in pool {
                if ext.len() == m {
                    break;
                }
                if ext.iter().all(|p| p.0 != x) {
                    ext.push((x, v));
                }
            }
            ext.sort_by(|p, q| p.0.total_cmp(&q.0));
            if ext.len() < m {
                break;
            }
            reference = ext.iter().map(|p| p.0).collect();
            continue;
        }
        while ext.len() > m {
            if ext[0].1.abs() < ext[ext.len() - 1].1.abs() {
                ext.remove(0);
            } else {
                ext.pop();
            }
        }
        let min_ref = ext.iter().map(|p| p.1.abs()).fold(f64::INFINITY, f64::min);
        let spread = (max_abs - min_ref) / max_abs;
        let cand = Minimax {
            coeffs,
            max_error: max_abs,
            spread,
            iterations: iter,
            reference: reference.clone(),
        };
        let better = best.as_ref().is_none_or(|b| cand.max_error < b.max_error);
        if spread <= opts.tol {
            return Ok(cand);
        }
        if better {
            best = Some(cand);
        }
        reference = ext.iter().map(|p| p.0).collect();
    }
    match best {
        Some(b) if b.spread <= opts.accept_spread => Ok(b),
        Some(b) => Err(Error::RemezNonConvergence {
            iterations: opts.max_iter,
            spread: b.spread,
        }),
        None => Err(Error::RemezNonConvergence {
            iterations: 0,
            spread: f64::INFINITY,
        }),
    }
}

/// Minimax polynomial of the given degree for `target` on `range`.
pub fn fit_remez(target: impl Fn(f64) -> f64 + Sync + Send, range: &ApproxRange, degree: usize) -> Result<Polynomial> {
    fit_remez_with(target, range, degree, &RemezOptions::default()).map(|(p, _)| p)
}

/// Like [`fit_remez`] but also returns the convergence record.
pub fn fit_remez_with(
    target: impl Fn(f64) -> f64 + Sync + Send,
    range: &ApproxRange,
    degree: usize,
    opts: &RemezOptions,
) -> Result<(Polynomial, Minimax)> {
    let (scale, shift) = unit_map(range.lo, range.hi);
    let mm = remez(
        target,
        |x, out| chebyshev_values(scale * x + shift, out),
        degree + 1,
        range.lo,
        range.hi,
        opts,
    )?;
    Ok((chebyshev_to_polynomial(&mm.coeffs, scale, shift), mm))
}

/// Odd minimax polynomial approximating the constant 1 on `[lo, hi]`
/// (`0 < lo < hi`), i.e. `sign(x)` on `±[lo, hi]`.
pub fn fit_odd_sign(lo: f64, hi: f64, degree: usize, opts: &RemezOptions) -> Result<(Polynomial, Minimax)> {
    if !(lo > 0.0) || degree.is_multiple_of(2) {
        return Err(Error::InvalidRange { lo, hi });
    }
    let terms = degree.div_ceil(2);
    let inv = 1.0 / hi;
    let mm = remez(
        |_| 1.0,
        |x, out| {
            let mut t = vec![0.0; degree + 1];
            chebyshev_values(x * inv, &mut t);
            for (j, o) in out.iter_mut().enumerate() {
                *o = t[2 * j + 1];
            }
        },
        terms,
        lo,
        hi,
        opts,
    )?;
    let mut full = vec![0.0; degree + 1];
    for (j, c) in mm.coeffs.iter().enumerate() {
        full[2 * j + 1] = *c;
    }
    Ok((chebyshev_to_polynomial(&full, inv, 0.0), mm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_degree_two() {
        let r = ApproxRange::fixed(-1.0, 1.0).unwrap();
        let (p, mm) = fit_remez_with(f64::abs, &r, 2, &RemezOptions::default()).unwrap();
        assert!((mm.max_error - 0.125).abs() < 1e-6, "{}", mm.max_error);
        assert!((p.eval(0.0) - 0.125).abs() < 1e-6);
    }

    #[test]
    fn exact_representation_short_circuits() {
        let r = ApproxRange::fixed(-2.0, 3.0).unwrap();
        let p = fit_remez(|x| 1.0 - 2.0 * x + 0.5 * x * x, &r, 3).unwrap();
        let c = p.coeffs();
        assert!((c[0] - 1.0).abs() < 1e-10 && (c[1] + 2.0).abs() < 1e-10 && (c[2] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn odd_sign_equioscillates() {
        let (p, mm) = fit_odd_sign(0.1, 1.0, 7, &RemezOptions::default()).unwrap();
        assert!(p.is_odd());
        assert!(mm.spread < 1e-6);
        let worst = (0..=1000)
            .map(|i| 0.1 + 0.9 * i as f64 / 1000.0)
            .map(|x| (p.eval(x) - 1.0).abs())
            .fold(0.0, f64::max);
        assert!((worst - mm.max_error).abs() < 1e-6 * mm.max_error.max(1.0));
    }
}
