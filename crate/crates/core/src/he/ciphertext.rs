use std::ops::{Deref, Index};

/// A simulated ciphertext: a full slot vector and its remaining depth.
///
/// Only a [`Backend`](super::Backend) produces ciphertexts, so the slot
/// length always equals the backend's slot count.
#[derive(Debug, Clone, PartialEq)]
pub struct CipherText {
    pub(crate) slots: Vec<f64>,
    pub(crate) level: usize,
    pub(crate) tag: u64,
}

impl CipherText {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }
}

/// A cleartext operand, always padded to the full slot count.
#[derive(Debug, Clone, PartialEq)]
pub struct PlainVector(Vec<f64>);

impl PlainVector {
    /// Zero-pads `values` to `slot_count`. Extra values are dropped.
    pub fn from_prefix(values: &[f64], slot_count: usize) -> Self {
        let mut v = vec![0.0; slot_count];
        let n = values.len().min(slot_count);
        v[..n].copy_from_slice(&values[..n]);
        PlainVector(v)
    }

    /// Wraps a full-length vector.
    pub fn from_full(values: Vec<f64>) -> Self {
        PlainVector(values)
    }

    /// `c` in every slot.
    pub fn splat(c: f64, slot_count: usize) -> Self {
        PlainVector(vec![c; slot_count])
    }

    /// `c` in the first `len` slots, zero elsewhere.
    pub fn masked(c: f64, len: usize, slot_count: usize) -> Self {
        let mut v = vec![0.0; slot_count];
        v[..len.min(slot_count)].fill(c);
        PlainVector(v)
    }

    /// Scales every slot by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        PlainVector(self.0.iter().map(|x| x * c).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Cyclic left rotation by `t`, matching ciphertext rotation semantics.
    pub fn rotated(&self, t: isize) -> Self {
        let n = self.0.len();
        if n == 0 {
            return self.clone();
        }
        let shift = t.rem_euclid(n as isize) as usize;
        let mut v = Vec::with_capacity(n);
        v.extend_from_slice(&self.0[shift..]);
        v.extend_from_slice(&self.0[..shift]);
        PlainVector(v)
    }
}

impl Deref for PlainVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for PlainVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
