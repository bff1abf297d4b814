//! Homomorphic polynomial evaluation with a depth-optimal power tree.

use super::sign::exact_step;
use super::{Comparator, Polynomial};
use crate::error::Result;
use crate::he::{Backend, CipherText, Operand, PlainVector, SlotOp};

/// Levels consumed by [`eval_poly_he`]: `⌈log2(deg + 1)⌉`, 0 for constants.
pub fn poly_depth(p: &Polynomial) -> usize {
    let d = p.degree();
    if d == 0 {
        0
    } else {
        (usize::BITS - d.leading_zeros()) as usize
    }
}

enum Term {
    Zero,
    Const(PlainVector),
    Cipher(CipherText),
}

struct Ctx<'a> {
    x: &'a CipherText,
    /// `powers[j] = x^(2^j)`
    powers: Vec<CipherText>,
    mask: Option<&'a PlainVector>,
    slots: usize,
}

impl Ctx<'_> {
    fn plain(&self, c: f64) -> PlainVector {
        match self.mask {
            Some(m) => m.scaled(c),
            None => PlainVector::splat(c, self.slots),
        }
    }
}

fn add_terms(be: &mut dyn Backend, a: Term, b: Term) -> Result<Term> {
    Ok(match (a, b) {
        (Term::Zero, t) | (t, Term::Zero) => t,
        (Term::Const(p), Term::Const(q)) => {
            Term::Const(PlainVector::from_full(p.iter().zip(q.iter()).map(|(x, y)| x + y).collect()))
        }
        (Term::Cipher(c), Term::Const(p)) | (Term::Const(p), Term::Cipher(c)) => {
            Term::Cipher(be.add_plain(&c, &p)?)
        }
        (Term::Cipher(c), Term::Cipher(d)) => Term::Cipher(be.add(&c, &d)?),
    })
}

/// Evaluates `Σ c_i x^i` for `c.len() = 2^m` coefficients.
fn tree(be: &mut dyn Backend, ctx: &Ctx<'_>, c: &[f64], m: usize) -> Result<Term> {
    if c.iter().all(|&v| v == 0.0) {
        return Ok(Term::Zero);
    }
    if m == 0 {
        return Ok(Term::Const(ctx.plain(c[0])));
    }
    if m == 1 {
        let lo = if c[0] == 0.0 {
            Term::Zero
        } else {
            Term::Const(ctx.plain(c[0]))
        };
        let hi = if c[1] == 0.0 {
            Term::Zero
        } else {
            Term::Cipher(be.mul_plain(ctx.x, &ctx.plain(c[1]))?)
        };
        return add_terms(be, lo, hi);
    }
    let half = c.len() / 2;
    let lo = tree(be, ctx, &c[..half], m - 1)?;
    let hi = match tree(be, ctx, &c[half..], m - 1)? {
        Term::Zero => Term::Zero,
        Term::Const(p) => Term::Cipher(be.mul_plain(&ctx.powers[m - 1], &p)?),
        Term::Cipher(h) => Term::Cipher(be.mul(&ctx.powers[m - 1], &h)?),
    };
    add_terms(be, lo, hi)
}

fn eval_impl(be: &mut dyn Backend, x: &CipherText, p: &Polynomial, mask: Option<&PlainVector>) -> Result<CipherText> {
    let slots = be.slot_count();
    let m = poly_depth(p);
    let mut powers = Vec::with_capacity(m);
    if m > 0 {
        powers.push(x.clone());
    }
    for j in 1..m {
        let prev = &powers[j - 1];
        let sq = be.mul(prev, prev)?;
        powers.push(sq);
    }
    let mut coeffs = p.coeffs().to_vec();
    coeffs.resize(1 << m, 0.0);
    let ctx = Ctx {
        x,
        powers,
        mask,
        slots,
    };
    match tree(be, &ctx, &coeffs, m)? {
        Term::Cipher(c) => Ok(c),
        t => {
            let zero = be.sub(x, x)?;
            match t {
                Term::Const(p) => be.add_plain(&zero, &p),
                _ => Ok(zero),
            }
        }
    }
}

fn tree_plain(c: &[f64], m: usize, x: f64, powers: &[f64]) -> Option<f64> {
    if c.iter().all(|&v| v == 0.0) {
        return None;
    }
    let add = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => Some(a + b),
        (a, None) => a,
        (None, b) => b,
    };
    match m {
        0 => Some(c[0]),
        1 => add((c[0] != 0.0).then_some(c[0]), (c[1] != 0.0).then(|| x * c[1])),
        _ => {
            let half = c.len() / 2;
            let lo = tree_plain(&c[..half], m - 1, x, powers);
            let hi = tree_plain(&c[half..], m - 1, x, powers).map(|h| powers[m - 1] * h);
            add(lo, hi)
        }
    }
}

/// Scalar evaluation in the same operation order as [`eval_poly_he`], so the
/// two agree to the last bit on exact backends.
pub fn eval_poly_tree(p: &Polynomial, x: f64) -> f64 {
    let m = poly_depth(p);
    let mut powers = Vec::with_capacity(m);
    if m > 0 {
        powers.push(x);
    }
    for j in 1..m {
        powers.push(powers[j - 1] * powers[j - 1]);
    }
    let mut coeffs = p.coeffs().to_vec();
    coeffs.resize(1 << m, 0.0);
    tree_plain(&coeffs, m, x, &powers).unwrap_or(0.0)
}

/// `p(x)` slot-wise, consuming exactly [`poly_depth`] levels.
pub fn eval_poly_he(be: &mut dyn Backend, x: &CipherText, p: &Polynomial) -> Result<CipherText> {
    eval_impl(be, x, p, None)
}

/// `mask ⊙ p(x)` at the same depth as [`eval_poly_he`]: the mask is folded
/// into the leaf coefficients.
pub fn eval_poly_he_masked(
    be: &mut dyn Backend,
    x: &CipherText,
    p: &Polynomial,
    mask: &PlainVector,
) -> Result<CipherText> {
    eval_impl(be, x, p, Some(mask))
}

/// Step function of `u` under `comparator`, optionally multiplied by `mask`
/// at no extra depth.
pub fn apply_comparator(
    be: &mut dyn Backend,
    u: &CipherText,
    comparator: &Comparator,
    mask: Option<&PlainVector>,
) -> Result<CipherText> {
    match comparator {
        Comparator::Exact => match mask {
            Some(m) => {
                let m = m.as_slice();
                be.map_slots(u, &|i, x| exact_step(x) * m[i], 1)
            }
            None => be.map_slots(u, &|_, x| exact_step(x), 1),
        },
        Comparator::Composite(cs) => {
            let stages = cs.stages();
            let mut y = u.clone();
            for p in &stages[..stages.len() - 1] {
                y = eval_poly_he(be, &y, p)?;
            }
            eval_impl(be, &y, &cs.step_stage(), mask)
        }
    }
}

/// Encrypted comparison: approximately 1 where `a > b`, 0 where `a < b` and
/// exactly ½ where they are equal. `b` may be a ciphertext or a plaintext.
pub fn poly_comp<'a>(
    be: &mut dyn Backend,
    a: &CipherText,
    b: impl Into<Operand<'a>>,
    comparator: &Comparator,
) -> Result<CipherText> {
    let d = be.slotwise(SlotOp::Sub, a, b.into())?;
    check_unit_range(be, &d, comparator)?;
    apply_comparator(be, &d, comparator, None)
}

/// Debug-build guard on exact backends: composite comparator inputs must lie
/// in `[-1, 1]`.
pub(crate) fn check_unit_range(be: &dyn Backend, u: &CipherText, comparator: &Comparator) -> Result<()> {
    if cfg!(debug_assertions) && be.is_exact() && matches!(comparator, Comparator::Composite(_)) {
        if let Some(&value) = be.decrypt(u).iter().find(|v| v.abs() > 1.0 + 1e-12) {
            return Err(crate::Error::InputOutOfRange { value });
        }
    }
    Ok(())
}
