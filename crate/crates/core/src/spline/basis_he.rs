//! Slot-parallel B-spline basis evaluation over ciphertexts.

use super::{GridMatrix, PackedInput};
use crate::approx::{apply_comparator, Comparator};
use crate::error::{Error, Result};
use crate::he::{Backend, CipherText, PlainVector};

/// Basis values in column-tiled layout: slot `m·n_i + i` holds `B_{m,k}(x_i)`
/// for `m < count`; every later slot is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector {
    pub ct: CipherText,
    pub n_i: usize,
    /// `g + k`
    pub count: usize,
    /// Inputs found within the comparator's separation of a knot. Only
    /// computed in debug builds on exact backends.
    pub near_knot: Option<usize>,
}

impl BasisVector {
    pub fn len(&self) -> usize {
        self.n_i * self.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Levels consumed by [`bspline_basis_he`] after packing: the comparator
/// and one per recursion step. The order-0 combination is additive.
pub fn basis_depth(k: usize, comparator: &Comparator) -> usize {
    comparator.depth() + k
}

/// Scaled reciprocal knot gap used by the recursion, `1 / (s·(b - a))`.
pub(crate) fn inv_gap(scale: f64, a: f64, b: f64) -> f64 {
    1.0 / (scale * (b - a))
}

pub(crate) fn tag_stage<T>(r: Result<T>, stage: &str) -> Result<T> {
    r.map_err(|e| match e {
        Error::DepthExhausted { level, .. } => Error::DepthExhausted {
            stage: stage.to_string(),
            level,
        },
        e => e,
    })
}

fn separation(comparator: &Comparator) -> f64 {
    match comparator {
        Comparator::Exact => 0.0,
        Comparator::Composite(cs) => cs.delta(),
    }
}

fn debug_scan(be: &dyn Backend, us: [&CipherText; 2], len: usize, comparator: &Comparator) -> Result<Option<usize>> {
    if !cfg!(debug_assertions) || !be.is_exact() {
        return Ok(None);
    }
    let delta = separation(comparator);
    let mut near = 0;
    for u in us {
        for &v in &be.decrypt(u)[..len] {
            if matches!(comparator, Comparator::Composite(_)) && v.abs() > 1.0 + 1e-12 {
                return Err(Error::InputOutOfRange { value: v });
            }
            if v == 0.0 || v.abs() < delta {
                near += 1;
            }
        }
    }
    Ok(Some(near))
}

/// Evaluates all `g + k` degree-`k` basis functions of every input at once.
///
/// Order 0 is `step(x - t_m) + step(t_{m+1} - x) - 1` per block; each recursion
/// step combines the block with its right neighbour (one rotation by `n_i`).
/// Knots are scaled by the packing factor so comparator inputs fall in
/// `[-1, 1]`. The reciprocal-gap constants are zero outside the blocks that
/// are still valid, which keeps the tail clean at no extra level.
pub fn bspline_basis_he(
    be: &mut dyn Backend,
    xp: &PackedInput,
    grid: &GridMatrix,
    comparator: &Comparator,
) -> Result<BasisVector> {
    let n = grid.n_i();
    let kk = grid.intervals();
    let k = grid.k();
    if xp.n_i != n || xp.copies < kk {
        return Err(Error::DimensionMismatch(format!(
            "packed input ({} features, {} copies) does not match grid ({n} features, {kk} intervals)",
            xp.n_i, xp.copies
        )));
    }
    if k > 0 {
        grid.check_distinct()?;
    }
    let slots = be.slot_count();
    if n * kk > slots {
        return Err(Error::PackingOverflow {
            needed: n * kk,
            slots,
        });
    }
    let s = xp.scale;
    let x = &xp.ct;

    let lo = grid.block_vector(kk, slots, |m, t| t[m] * s);
    let hi = grid.block_vector(kk, slots, |m, t| t[m + 1] * s);
    let u1 = be.sub_plain(x, &lo)?;
    let u2 = be.sub_from_plain(&hi, x)?;
    let near_knot = debug_scan(be, [&u1, &u2], n * kk, comparator)?;
    let valid = PlainVector::masked(1.0, n * kk, slots);
    let x1 = tag_stage(apply_comparator(be, &u1, comparator, Some(&valid)), "comparator")?;
    let x2 = tag_stage(apply_comparator(be, &u2, comparator, Some(&valid)), "comparator")?;
    // x1 + x2 - 1 is the interval indicator whenever t_m <= t_{m+1}, at no level
    let both = be.add(&x1, &x2)?;
    let mut b = be.sub_plain(&both, &valid)?;

    for j in 1..=k {
        let blocks = kk - j;
        let a = grid.block_vector(blocks, slots, |m, t| t[m] * s);
        let p = grid.block_vector(blocks, slots, |m, t| inv_gap(s, t[m], t[m + j]));
        let c = grid.block_vector(blocks, slots, |m, t| t[m + j + 1] * s);
        let q = grid.block_vector(blocks, slots, |m, t| inv_gap(s, t[m + 1], t[m + j + 1]));
        let stage = format!("basis recursion {j}");
        let l = be.sub_plain(x, &a)?;
        let l = tag_stage(be.mul_plain(&l, &p), &stage)?;
        let r = be.sub_from_plain(&c, x)?;
        let r = tag_stage(be.mul_plain(&r, &q), &stage)?;
        let shifted = be.rotate(&b, n as isize)?;
        let left = tag_stage(be.mul(&l, &b), &stage)?;
        let right = tag_stage(be.mul(&r, &shifted), &stage)?;
        b = be.add(&left, &right)?;
    }
    Ok(BasisVector {
        ct: b,
        n_i: n,
        count: grid.basis_count(),
        near_knot,
    })
}

/// Cleartext replay of [`bspline_basis_he`] for one input: same scaling,
/// same comparator, same operation order.
pub fn bspline_basis_mirrored(x: f64, knots: &[f64], k: usize, scale: f64, comparator: &Comparator) -> Vec<f64> {
    let kk = knots.len() - 1;
    let xs = x * scale;
    let mut b: Vec<f64> = (0..kk)
        .map(|m| {
            let x1 = comparator.step(xs - knots[m] * scale);
            let x2 = comparator.step(knots[m + 1] * scale - xs);
            (x1 + x2) - 1.0
        })
        .collect();
    for j in 1..=k {
        b = (0..kk - j)
            .map(|m| {
                let l = (xs - knots[m] * scale) * inv_gap(scale, knots[m], knots[m + j]);
                let r = (knots[m + j + 1] * scale - xs) * inv_gap(scale, knots[m + 1], knots[m + j + 1]);
                l * b[m] + r * b[m + 1]
            })
            .collect();
    }
    b
}
