//! Diagonal-method matrix-vector products with baby-step/giant-step rotations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::he::{Backend, CipherText, PlainVector};
use crate::par::{self, ExecMode};
use crate::spline::PermutationSpec;

/// Read access to a cleartext matrix.
pub trait MatrixView: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn get(&self, r: usize, c: usize) -> f64;
}

impl MatrixView for DMatrix<f64> {
    fn rows(&self) -> usize {
        self.nrows()
    }

    fn cols(&self) -> usize {
        self.ncols()
    }

    fn get(&self, r: usize, c: usize) -> f64 {
        self[(r, c)]
    }
}

impl MatrixView for PermutationSpec {
    fn rows(&self) -> usize {
        self.dim()
    }

    fn cols(&self) -> usize {
        self.dim()
    }

    fn get(&self, r: usize, c: usize) -> f64 {
        if self.target(c) == r {
            1.0
        } else {
            0.0
        }
    }
}

/// `(⌈√m⌉, ⌈m / ⌈√m⌉⌉)`
pub fn default_split(m: usize) -> (usize, usize) {
    let b = (m as f64).sqrt().ceil().max(1.0) as usize;
    (b, m.div_ceil(b).max(1))
}

/// Diagonal arrangement chosen for a matrix shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatvecLayout {
    /// Square `m × m` diagonals, `m = max(rows, cols)`; the input is
    /// replicated once when more than one output row is needed.
    Square { m: usize, replicate: bool },
    /// `rows + cols - 1` generalized diagonals without replication, used when
    /// two copies of the input do not fit.
    Extended,
}

impl MatvecLayout {
    pub fn choose(rows: usize, cols: usize, slots: usize) -> Self {
        let m = rows.max(cols);
        if rows <= 1 {
            MatvecLayout::Square { m, replicate: false }
        } else if 2 * m <= slots {
            MatvecLayout::Square { m, replicate: true }
        } else {
            MatvecLayout::Extended
        }
    }

    pub fn diagonals(&self, rows: usize, cols: usize) -> usize {
        match *self {
            MatvecLayout::Square { m, .. } => m,
            MatvecLayout::Extended => rows + cols - 1,
        }
    }

    fn offset(&self, rows: usize) -> isize {
        match self {
            MatvecLayout::Square { .. } => 0,
            MatvecLayout::Extended => -(rows as isize - 1),
        }
    }
}

/// Predicted operation counts of one [`bsgs_matvec`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatvecCost {
    pub rotations: u64,
    pub pt_mults: u64,
    pub adds: u64,
}

fn resolve_split(diagonals: usize, split: Option<(usize, usize)>) -> Result<(usize, usize)> {
    match split {
        None => Ok(default_split(diagonals)),
        Some((b, g)) if b >= 1 && g >= 1 && b * g >= diagonals => Ok((b, g)),
        Some((b, g)) => Err(Error::InvalidConfig(format!(
            "BSGS split ({b}, {g}) does not cover {diagonals} diagonals"
        ))),
    }
}

/// Operation counts of [`bsgs_matvec`] without running it.
pub fn matvec_cost(rows: usize, cols: usize, slots: usize, split: Option<(usize, usize)>) -> Result<MatvecCost> {
    let layout = MatvecLayout::choose(rows, cols, slots);
    let d = layout.diagonals(rows, cols);
    let (bs, _) = resolve_split(d, split)?;
    let giants = d.div_ceil(bs);
    let babies = bs.min(d);
    let off = layout.offset(rows);
    let replicate = matches!(layout, MatvecLayout::Square { replicate: true, .. });
    let giant_rot = (0..giants).filter(|&g| off + (g * bs) as isize != 0).count();
    Ok(MatvecCost {
        rotations: (replicate as usize + babies - 1 + giant_rot) as u64,
        pt_mults: d as u64,
        adds: (replicate as usize + (d - giants) + (giants - 1)) as u64,
    })
}

/// `W·v` for a cleartext `rows × cols` matrix and a ciphertext holding `v`
/// in its first `cols` slots (zero elsewhere). The result holds `W·v` in its
/// first `rows` slots and zero elsewhere. Every diagonal is multiplied,
/// including all-zero ones, so costs depend only on the shape.
pub fn bsgs_matvec(
    be: &mut dyn Backend,
    w: &dyn MatrixView,
    v: &CipherText,
    split: Option<(usize, usize)>,
    exec: ExecMode,
) -> Result<CipherText> {
    let (rows, cols) = (w.rows(), w.cols());
    let slots = be.slot_count();
    if rows == 0 || cols == 0 || rows > slots || cols > slots {
        return Err(Error::DimensionMismatch(format!(
            "{rows}×{cols} matrix on {slots} slots"
        )));
    }
    let layout = MatvecLayout::choose(rows, cols, slots);
    let d = layout.diagonals(rows, cols);
    let (bs, _) = resolve_split(d, split)?;
    let off = layout.offset(rows);
    let m = match layout {
        MatvecLayout::Square { m, .. } => m,
        MatvecLayout::Extended => 0,
    };

    let src = match layout {
        MatvecLayout::Square { replicate: true, m } => {
            let r = be.rotate(v, -(m as isize))?;
            be.add(v, &r)?
        }
        _ => v.clone(),
    };
    let babies = bs.min(d);
    let mut baby = Vec::with_capacity(babies);
    baby.push(src.clone());
    for b in 1..babies {
        baby.push(be.rotate(&src, b as isize)?);
    }

    // entry of diagonal (giant shift t, baby b) for output row i
    let entry = |i: usize, t: isize, b: usize| -> f64 {
        match layout {
            MatvecLayout::Square { .. } => {
                let c = (i + t as usize + b) % m;
                if c < cols {
                    w.get(i, c)
                } else {
                    0.0
                }
            }
            MatvecLayout::Extended => {
                let c = i as isize + t + b as isize;
                if c >= 0 && (c as usize) < cols {
                    w.get(i, c as usize)
                } else {
                    0.0
                }
            }
        }
    };

    let giants = d.div_ceil(bs);
    let mut acc: Option<CipherText> = None;
    for g in 0..giants {
        let t = off + (g * bs) as isize;
        let count = bs.min(d - g * bs);
        let diags = par::map_range(exec, count, |b| {
            let mut p = vec![0.0; slots];
            for i in 0..rows {
                let j = (i as isize + t).rem_euclid(slots as isize) as usize;
                p[j] = entry(i, t, b);
            }
            PlainVector::from_full(p)
        });
        let mut inner: Option<CipherText> = None;
        for (b, p) in diags.iter().enumerate() {
            let term = be.mul_plain(&baby[b], p)?;
            inner = Some(match inner {
                None => term,
                Some(a) => be.add(&a, &term)?,
            });
        }
        let inner = inner.expect("every giant step has at least one diagonal");
        let shifted = be.rotate(&inner, t)?;
        acc = Some(match acc {
            None => shifted,
            Some(a) => be.add(&a, &shifted)?,
        });
    }
    Ok(acc.expect("at least one giant step"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::he::{BackendConfig, Cleartext};

    fn run(w: &DMatrix<f64>, v: &[f64], slots: usize, split: Option<(usize, usize)>) -> (Vec<f64>, Cleartext) {
        let mut be = Cleartext::new(BackendConfig::new(slots, 4)).unwrap();
        let ct = be.encrypt(v, 4).unwrap();
        be.take_counter();
        let out = bsgs_matvec(&mut be, w, &ct, split, ExecMode::Sequential).unwrap();
        assert_eq!(out.level(), 3);
        (be.decrypt(&out), be)
    }

    #[test]
    fn two_by_two() {
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let (out, _) = run(&w, &[5.0, 6.0], 8, None);
        assert_eq!(&out[..2], &[17.0, 39.0]);
        assert!(out[2..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn identity() {
        let v: Vec<f64> = (0..7).map(|i| i as f64 - 3.5).collect();
        let (out, _) = run(&DMatrix::identity(7, 7), &v, 16, None);
        assert_eq!(&out[..7], &v[..]);
    }

    #[test]
    fn sixteen_with_four_by_four_split() {
        let w = DMatrix::from_fn(16, 16, |r, c| (r * 16 + c) as f64 * 0.01);
        let v: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        let (out, be) = run(&w, &v, 64, Some((4, 4)));
        assert!(be.counter().rotations <= 7);
        let want = &w * nalgebra::DVector::from_column_slice(&v);
        for i in 0..16 {
            assert!((out[i] - want[i]).abs() < 1e-12);
        }
        assert_eq!(be.counter().rotations, matvec_cost(16, 16, 64, Some((4, 4))).unwrap().rotations);
    }

    #[test]
    fn rectangular_and_extended_agree() {
        for (r, c, slots) in [(3, 10, 32), (10, 3, 32), (5, 12, 16), (12, 5, 16), (1, 9, 16), (9, 1, 16)] {
            let w = DMatrix::from_fn(r, c, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
            let v: Vec<f64> = (0..c).map(|i| 0.5 + i as f64).collect();
            let (out, be) = run(&w, &v, slots, None);
            let want = &w * nalgebra::DVector::from_column_slice(&v);
            for i in 0..r {
                assert!((out[i] - want[i]).abs() < 1e-9, "{r}×{c} row {i}");
            }
            assert!(out[r..].iter().all(|&x| x == 0.0), "{r}×{c} tail");
            let cost = matvec_cost(r, c, slots, None).unwrap();
            let k = be.counter();
            assert_eq!((k.rotations, k.pt_mults, k.adds), (cost.rotations, cost.pt_mults, cost.adds));
        }
    }

    #[test]
    fn permutation_view() {
        let p = crate::spline::gen_permutation(3, 4).unwrap();
        let v: Vec<f64> = (0..12).map(f64::from).collect();
        let (out, _) = run(&p.to_matrix(), &v, 32, None);
        let mut be = Cleartext::new(BackendConfig::new(32, 4)).unwrap();
        let ct = be.encrypt(&v, 4).unwrap();
        let via_view = bsgs_matvec(&mut be, &p, &ct, None, ExecMode::Parallel).unwrap();
        assert_eq!(be.decrypt(&via_view), out);
        assert_eq!(&out[..12], &p.apply(&v).unwrap()[..]);
    }

    #[test]
    fn bad_split() {
        let mut be = Cleartext::new(BackendConfig::new(16, 4)).unwrap();
        let ct = be.encrypt(&[1.0; 4], 4).unwrap();
        let w = DMatrix::identity(4, 4);
        assert!(bsgs_matvec(&mut be, &w, &ct, Some((1, 3)), ExecMode::Sequential).is_err());
    }
}
