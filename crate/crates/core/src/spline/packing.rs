use crate::error::{Error, Result};
use crate::he::{Backend, CipherText, PlainVector};

/// Ciphertext holding `copies` consecutive copies of an `n_i`-vector,
/// each multiplied by `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedInput {
    pub ct: CipherText,
    pub n_i: usize,
    pub copies: usize,
    pub scale: f64,
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Rotations used by [`repeat_pack`]: `⌈log2(copies)⌉`.
pub fn pack_rotations(copies: usize) -> usize {
    ceil_log2(copies)
}

/// True when doubling to the next power of two would spill past the last
/// slot, so the final doubling step needs a trimming mask.
pub fn pack_wraps(n_i: usize, copies: usize, slots: usize) -> bool {
    n_i * (1usize << ceil_log2(copies)) > slots
}

/// Levels consumed by [`repeat_pack`]: one for the input mask, plus one
/// in the wrap regime.
pub fn pack_depth(n_i: usize, copies: usize, slots: usize) -> usize {
    if pack_wraps(n_i, copies, slots) {
        2
    } else {
        1
    }
}

fn check(n_i: usize, copies: usize, slots: usize) -> Result<()> {
    if n_i == 0 || copies == 0 {
        return Err(Error::InvalidConfig("repeat packing needs n_i >= 1 and at least one copy".into()));
    }
    let needed = n_i * copies;
    if needed > slots {
        return Err(Error::PackingOverflow { needed, slots });
    }
    Ok(())
}

/// Replicates the first `n_i` slots `copies` times with `⌈log2(copies)⌉`
/// rotations by repeated doubling.
pub fn repeat_pack(be: &mut dyn Backend, ct: &CipherText, n_i: usize, copies: usize) -> Result<PackedInput> {
    repeat_pack_scaled(be, ct, n_i, copies, 1.0)
}

/// [`repeat_pack`] with the input mask set to `scale` instead of 1, so the
/// copies come out pre-scaled at no extra level.
pub fn repeat_pack_scaled(
    be: &mut dyn Backend,
    ct: &CipherText,
    n_i: usize,
    copies: usize,
    scale: f64,
) -> Result<PackedInput> {
    let s = be.slot_count();
    check(n_i, copies, s)?;
    let mask = PlainVector::masked(scale, n_i, s);
    let mut acc = be.mul_plain(ct, &mask)?;
    let steps = ceil_log2(copies);
    let wraps = pack_wraps(n_i, copies, s);
    let mut have = 1usize;
    for step in 0..steps {
        let last = step + 1 == steps;
        let shift = (n_i * have) as isize;
        let moved = if last && wraps {
            // only the copies that still fit are shifted in
            let keep = PlainVector::masked(1.0, n_i * (copies - have), s);
            let trimmed = be.mul_plain(&acc, &keep)?;
            be.rotate(&trimmed, -shift)?
        } else {
            be.rotate(&acc, -shift)?
        };
        acc = be.add(&acc, &moved)?;
        have *= 2;
    }
    Ok(PackedInput {
        ct: acc,
        n_i,
        copies,
        scale,
    })
}

/// Reference packing with one rotation per extra copy (`copies - 1` total).
pub fn naive_repeat_pack(be: &mut dyn Backend, ct: &CipherText, n_i: usize, copies: usize) -> Result<PackedInput> {
    let s = be.slot_count();
    check(n_i, copies, s)?;
    let mask = PlainVector::masked(1.0, n_i, s);
    let base = be.mul_plain(ct, &mask)?;
    let mut acc = base.clone();
    for j in 1..copies {
        let moved = be.rotate(&base, -((j * n_i) as isize))?;
        acc = be.add(&acc, &moved)?;
    }
    Ok(PackedInput {
        ct: acc,
        n_i,
        copies,
        scale: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::he::{BackendConfig, Cleartext};

    #[test]
    fn small_example() {
        let mut be = Cleartext::new(BackendConfig::new(8, 4)).unwrap();
        let ct = be.encrypt(&[1.0, 2.0], 4).unwrap();
        let p = repeat_pack(&mut be, &ct, 2, 4).unwrap();
        assert_eq!(be.decrypt(&p.ct), vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let c = be.counter();
        assert_eq!((c.rotations, c.pt_mults), (2, 1));
        assert_eq!(p.ct.level(), 3);
    }

    #[test]
    fn rotation_counts() {
        for (copies, rot) in [(7, 3), (20, 5), (2, 1), (1, 0), (64, 6), (33, 6)] {
            let mut be = Cleartext::new(BackendConfig::new(256, 4)).unwrap();
            let ct = be.encrypt(&[1.0, -1.0, 0.5], 4).unwrap();
            let p = repeat_pack(&mut be, &ct, 3, copies).unwrap();
            assert_eq!(be.counter().rotations, rot);
            let d = be.decrypt(&p.ct);
            for j in 0..copies {
                assert_eq!(&d[3 * j..3 * j + 3], &[1.0, -1.0, 0.5]);
            }
        }
    }

    #[test]
    fn wrap_regime_stays_clean() {
        // 3 · 8 = 24 > 16 slots, but 3 · 5 = 15 fits
        let mut be = Cleartext::new(BackendConfig::new(16, 4)).unwrap();
        let ct = be.encrypt(&[1.0, 2.0, 3.0], 4).unwrap();
        assert!(pack_wraps(3, 5, 16));
        let p = repeat_pack(&mut be, &ct, 3, 5).unwrap();
        let d = be.decrypt(&p.ct);
        for j in 0..5 {
            assert_eq!(&d[3 * j..3 * j + 3], &[1.0, 2.0, 3.0]);
        }
        assert_eq!(d[15], 0.0);
        assert_eq!(be.counter().rotations, 3);
        assert_eq!(4 - p.ct.level(), pack_depth(3, 5, 16));
    }

    #[test]
    fn overflow() {
        let mut be = Cleartext::new(BackendConfig::new(8, 4)).unwrap();
        let ct = be.encrypt(&[1.0, 2.0, 3.0], 4).unwrap();
        assert_eq!(
            repeat_pack(&mut be, &ct, 3, 3).unwrap_err(),
            Error::PackingOverflow { needed: 9, slots: 8 }
        );
    }

    #[test]
    fn naive_reference() {
        let mut be = Cleartext::new(BackendConfig::new(64, 4)).unwrap();
        let ct = be.encrypt(&[4.0, 5.0], 4).unwrap();
        let a = naive_repeat_pack(&mut be, &ct, 2, 7).unwrap();
        assert_eq!(be.counter().rotations, 6);
        let b = repeat_pack(&mut be, &ct, 2, 7).unwrap();
        assert_eq!(&be.decrypt(&a.ct)[..14], &be.decrypt(&b.ct)[..14]);
    }
}
