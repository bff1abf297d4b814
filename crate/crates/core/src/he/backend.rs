use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{BackendConfig, CipherText, OpCounter, PlainVector};
use crate::error::{Error, Result};

/// Slot-wise binary operation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotOp {
    Add,
    /// `a - b`
    Sub,
    /// `b - a`
    RevSub,
    /// Ciphertext-ciphertext or plaintext-ciphertext product, depending on
    /// the operand.
    Mul,
}

/// Second operand of a slot-wise operation.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Cipher(&'a CipherText),
    Plain(&'a PlainVector),
}

impl<'a> From<&'a CipherText> for Operand<'a> {
    fn from(c: &'a CipherText) -> Self {
        Operand::Cipher(c)
    }
}

impl<'a> From<&'a PlainVector> for Operand<'a> {
    fn from(p: &'a PlainVector) -> Self {
        Operand::Plain(p)
    }
}

/// The contract every HE backend implements. The KAN pipeline is written
/// against this trait only, so a lattice-based scheme can be dropped in.
pub trait Backend {
    fn config(&self) -> &BackendConfig;

    /// Snapshot of the operation tally so far.
    fn counter(&self) -> OpCounter;

    /// Returns the current tally and starts a fresh one.
    fn take_counter(&mut self) -> OpCounter;

    /// Encrypts `v` zero-padded to the slot count, at `level`.
    fn encrypt(&mut self, v: &[f64], level: usize) -> Result<CipherText>;

    fn decrypt(&self, a: &CipherText) -> Vec<f64>;

    fn slotwise(&mut self, op: SlotOp, a: &CipherText, b: Operand<'_>) -> Result<CipherText>;

    /// Cyclic rotation; positive `t` rotates left.
    fn rotate(&mut self, a: &CipherText, t: isize) -> Result<CipherText>;

    /// Bootstrapping hook: re-encrypts `a` at `level`.
    fn refresh(&mut self, a: &CipherText, level: usize) -> Result<CipherText>;

    /// Applies a cleartext function `f(slot_index, value)` to every slot,
    /// charging `depth` levels.
    ///
    /// This is not a homomorphic operation; it exists so test oracles (the
    /// exact step comparator) can run through the same dataflow as the
    /// polynomial path.
    fn map_slots(
        &mut self,
        a: &CipherText,
        f: &dyn Fn(usize, f64) -> f64,
        depth: usize,
    ) -> Result<CipherText>;

    /// True when decryption is bit-exact (no injected noise).
    fn is_exact(&self) -> bool {
        false
    }

    fn slot_count(&self) -> usize {
        self.config().slot_count
    }

    fn depth_budget(&self) -> usize {
        self.config().depth_budget
    }

    fn add(&mut self, a: &CipherText, b: &CipherText) -> Result<CipherText> {
        self.slotwise(SlotOp::Add, a, Operand::Cipher(b))
    }

    fn sub(&mut self, a: &CipherText, b: &CipherText) -> Result<CipherText> {
        self.slotwise(SlotOp::Sub, a, Operand::Cipher(b))
    }

    fn mul(&mut self, a: &CipherText, b: &CipherText) -> Result<CipherText> {
        self.slotwise(SlotOp::Mul, a, Operand::Cipher(b))
    }

    fn add_plain(&mut self, a: &CipherText, p: &PlainVector) -> Result<CipherText> {
        self.slotwise(SlotOp::Add, a, Operand::Plain(p))
    }

    fn sub_plain(&mut self, a: &CipherText, p: &PlainVector) -> Result<CipherText> {
        self.slotwise(SlotOp::Sub, a, Operand::Plain(p))
    }

    /// `p - a`
    fn sub_from_plain(&mut self, p: &PlainVector, a: &CipherText) -> Result<CipherText> {
        self.slotwise(SlotOp::RevSub, a, Operand::Plain(p))
    }

    fn mul_plain(&mut self, a: &CipherText, p: &PlainVector) -> Result<CipherText> {
        self.slotwise(SlotOp::Mul, a, Operand::Plain(p))
    }
}

/// Per-operation perturbation applied to freshly produced slots.
pub trait NoiseModel {
    fn perturb(&mut self, slots: &mut [f64]);

    fn is_exact(&self) -> bool {
        false
    }
}

/// Exact arithmetic.
#[derive(Debug, Clone, Default)]
pub struct NoNoise;

impl NoiseModel for NoNoise {
    fn perturb(&mut self, _slots: &mut [f64]) {}

    fn is_exact(&self) -> bool {
        true
    }
}

/// Independent additive Gaussian noise on every slot of every result.
#[derive(Debug, Clone)]
pub struct GaussianNoise {
    normal: Normal<f64>,
    rng: ChaCha8Rng,
}

impl GaussianNoise {
    pub fn new(std: f64, seed: u64) -> Self {
        GaussianNoise {
            normal: Normal::new(0.0, std).expect("noise std validated by BackendConfig"),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl NoiseModel for GaussianNoise {
    fn perturb(&mut self, slots: &mut [f64]) {
        for s in slots {
            *s += self.normal.sample(&mut self.rng);
        }
    }
}

/// Functional model of a leveled SIMD scheme.
#[derive(Debug, Clone)]
pub struct Simulator<N> {
    cfg: BackendConfig,
    counter: OpCounter,
    noise: N,
    next_tag: u64,
}

/// Exact backend: decryption of any program equals the same program on raw
/// vectors.
pub type Cleartext = Simulator<NoNoise>;

/// Backend with additive Gaussian noise after every operation.
pub type Noisy = Simulator<GaussianNoise>;

impl Cleartext {
    pub fn new(cfg: BackendConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Simulator {
            cfg,
            counter: OpCounter::default(),
            noise: NoNoise,
            next_tag: 0,
        })
    }
}

impl Noisy {
    pub fn new(cfg: BackendConfig) -> Result<Self> {
        cfg.validate()?;
        let noise = GaussianNoise::new(cfg.noise_std, cfg.rng_seed);
        Ok(Simulator {
            cfg,
            counter: OpCounter::default(),
            noise,
            next_tag: 0,
        })
    }
}

/// Picks `Cleartext` when `noise_std == 0` and `Noisy` otherwise.
pub fn backend_from_config(cfg: &BackendConfig) -> Result<Box<dyn Backend + Send>> {
    if cfg.noise_std == 0.0 {
        Ok(Box::new(Cleartext::new(cfg.clone())?))
    } else {
        Ok(Box::new(Noisy::new(cfg.clone())?))
    }
}

impl<N: NoiseModel> Simulator<N> {
    fn emit(&mut self, mut slots: Vec<f64>, level: usize) -> CipherText {
        self.noise.perturb(&mut slots);
        let tag = self.next_tag;
        self.next_tag += 1;
        let consumed = self.cfg.depth_budget.saturating_sub(level);
        if consumed > self.counter.max_depth_consumed {
            self.counter.max_depth_consumed = consumed;
        }
        CipherText { slots, level, tag }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.cfg.slot_count {
            return Err(Error::LengthMismatch {
                expected: self.cfg.slot_count,
                got: len,
            });
        }
        Ok(())
    }
}

impl<N: NoiseModel> Backend for Simulator<N> {
    fn config(&self) -> &BackendConfig {
        &self.cfg
    }

    fn counter(&self) -> OpCounter {
        self.counter
    }

    fn take_counter(&mut self) -> OpCounter {
        std::mem::take(&mut self.counter)
    }

    fn is_exact(&self) -> bool {
        self.noise.is_exact()
    }

    fn encrypt(&mut self, v: &[f64], level: usize) -> Result<CipherText> {
        let s = self.cfg.slot_count;
        if v.len() > s {
            return Err(Error::InputTooLong {
                len: v.len(),
                slots: s,
            });
        }
        if level > self.cfg.depth_budget {
            return Err(Error::InvalidConfig(format!(
                "encryption level {level} exceeds depth budget {}",
                self.cfg.depth_budget
            )));
        }
        let mut slots = vec![0.0; s];
        slots[..v.len()].copy_from_slice(v);
        Ok(self.emit(slots, level))
    }

    fn decrypt(&self, a: &CipherText) -> Vec<f64> {
        a.slots.clone()
    }

    fn slotwise(&mut self, op: SlotOp, a: &CipherText, b: Operand<'_>) -> Result<CipherText> {
        self.check_len(a.slots.len())?;
        let (rhs, level, is_ct) = match b {
            Operand::Cipher(c) => (&c.slots[..], a.level.min(c.level), true),
            Operand::Plain(p) => (p.as_slice(), a.level, false),
        };
        self.check_len(rhs.len())?;
        let lhs = &a.slots;
        let (slots, level) = match op {
            SlotOp::Add => {
                self.counter.adds += 1;
                (lhs.iter().zip(rhs).map(|(x, y)| x + y).collect(), level)
            }
            SlotOp::Sub => {
                self.counter.subs += 1;
                (lhs.iter().zip(rhs).map(|(x, y)| x - y).collect(), level)
            }
            SlotOp::RevSub => {
                self.counter.subs += 1;
                (lhs.iter().zip(rhs).map(|(x, y)| y - x).collect(), level)
            }
            SlotOp::Mul => {
                if level == 0 {
                    return Err(Error::DepthExhausted {
                        stage: "mul".into(),
                        level,
                    });
                }
                if is_ct {
                    self.counter.ct_mults += 1;
                } else {
                    self.counter.pt_mults += 1;
                }
                (lhs.iter().zip(rhs).map(|(x, y)| x * y).collect(), level - 1)
            }
        };
        Ok(self.emit(slots, level))
    }

    fn rotate(&mut self, a: &CipherText, t: isize) -> Result<CipherText> {
        let s = self.cfg.slot_count;
        self.check_len(a.slots.len())?;
        if t.unsigned_abs() >= s {
            return Err(Error::RotationOutOfRange { step: t, slots: s });
        }
        if t == 0 {
            return Ok(a.clone());
        }
        self.counter.rotations += 1;
        let shift = t.rem_euclid(s as isize) as usize;
        let mut slots = Vec::with_capacity(s);
        slots.extend_from_slice(&a.slots[shift..]);
        slots.extend_from_slice(&a.slots[..shift]);
        Ok(self.emit(slots, a.level))
    }

    fn refresh(&mut self, a: &CipherText, level: usize) -> Result<CipherText> {
        self.check_len(a.slots.len())?;
        if level > self.cfg.depth_budget {
            return Err(Error::InvalidConfig(format!(
                "refresh level {level} exceeds depth budget {}",
                self.cfg.depth_budget
            )));
        }
        self.counter.refreshes += 1;
        Ok(self.emit(a.slots.clone(), level))
    }

    fn map_slots(
        &mut self,
        a: &CipherText,
        f: &dyn Fn(usize, f64) -> f64,
        depth: usize,
    ) -> Result<CipherText> {
        self.check_len(a.slots.len())?;
        if a.level < depth {
            return Err(Error::DepthExhausted {
                stage: "map_slots".into(),
                level: a.level,
            });
        }
        let slots = a.slots.iter().enumerate().map(|(i, &x)| f(i, x)).collect();
        Ok(self.emit(slots, a.level - depth))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Cleartext {
        Cleartext::new(BackendConfig::new(8, 20)).unwrap()
    }

    #[test]
    fn add_is_slotwise() {
        let mut be = small();
        let a = be.encrypt(&[1.0, 2.0], 20).unwrap();
        let b = be.encrypt(&[3.0, 4.0], 20).unwrap();
        let c = be.add(&a, &b).unwrap();
        assert_eq!(&be.decrypt(&c)[..3], &[4.0, 6.0, 0.0]);
        assert_eq!(c.level(), 20);
        assert_eq!(be.counter().adds, 1);
    }

    #[test]
    fn mul_plain_by_ones_consumes_one_level() {
        let mut be = small();
        let a = be.encrypt(&[1.5, -2.0, 3.0], 20).unwrap();
        let ones = PlainVector::splat(1.0, 8);
        let c = be.mul_plain(&a, &ones).unwrap();
        assert_eq!(be.decrypt(&c), be.decrypt(&a));
        assert_eq!(c.level(), 19);
        assert_eq!(be.counter().pt_mults, 1);
    }

    #[test]
    fn mul_ct_at_level_twenty() {
        let mut be = small();
        let a = be.encrypt(&[2.0], 20).unwrap();
        let c = be.mul(&a, &a).unwrap();
        assert_eq!(c.level(), 19);
        assert_eq!(be.decrypt(&c)[0], 4.0);
        assert_eq!(be.counter().ct_mults, 1);
    }

    #[test]
    fn mixed_levels_take_minimum() {
        let mut be = small();
        let a = be.encrypt(&[1.0], 5).unwrap();
        let b = be.encrypt(&[1.0], 3).unwrap();
        assert_eq!(be.add(&a, &b).unwrap().level(), 3);
        assert_eq!(be.mul(&a, &b).unwrap().level(), 2);
    }

    #[test]
    fn depth_exhausted() {
        let mut be = small();
        let a = be.encrypt(&[1.0], 0).unwrap();
        let err = be.mul(&a, &a).unwrap_err();
        assert!(matches!(err, Error::DepthExhausted { .. }));
        let p = PlainVector::splat(1.0, 8);
        assert!(be.mul_plain(&a, &p).is_err());
    }

    #[test]
    fn length_mismatch() {
        let mut be = small();
        let a = be.encrypt(&[1.0], 3).unwrap();
        let p = PlainVector::splat(1.0, 4);
        assert!(matches!(
            be.add_plain(&a, &p),
            Err(Error::LengthMismatch { expected: 8, got: 4 })
        ));
    }

    #[test]
    fn rotation_directions() {
        let mut be = Cleartext::new(BackendConfig::new(4, 2)).unwrap();
        let a = be.encrypt(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        let l = be.rotate(&a, 1).unwrap();
        let r = be.rotate(&a, -1).unwrap();
        assert_eq!(be.decrypt(&l), vec![2.0, 3.0, 4.0, 1.0]);
        assert_eq!(be.decrypt(&r), vec![4.0, 1.0, 2.0, 3.0]);
        let same = be.rotate(&a, 0).unwrap();
        assert_eq!(be.decrypt(&same), be.decrypt(&a));
        assert_eq!(be.counter().rotations, 2);
        assert!(be.rotate(&a, 4).is_err());
        assert!(be.rotate(&a, -4).is_err());
    }

    #[test]
    fn encrypt_bounds() {
        let mut be = small();
        let ct = be.encrypt(&[], 20).unwrap();
        assert_eq!(be.decrypt(&ct), vec![0.0; 8]);
        assert!(matches!(
            be.encrypt(&[0.0; 9], 20),
            Err(Error::InputTooLong { len: 9, slots: 8 })
        ));
        assert!(be.encrypt(&[1.0], 21).is_err());
    }

    #[test]
    fn refresh_restores_level() {
        let mut be = small();
        let a = be.encrypt(&[3.0], 1).unwrap();
        let r = be.refresh(&a, 20).unwrap();
        assert_eq!(r.level(), 20);
        assert_eq!(be.decrypt(&r), be.decrypt(&a));
        assert_eq!(be.counter().refreshes, 1);
    }

    #[test]
    fn noisy_backend_is_seeded() {
        let cfg = BackendConfig::new(16, 4).with_noise(1e-3, 9);
        let mut a = Noisy::new(cfg.clone()).unwrap();
        let mut b = Noisy::new(cfg).unwrap();
        let x = a.encrypt(&[1.0; 16], 4).unwrap();
        let y = b.encrypt(&[1.0; 16], 4).unwrap();
        assert_eq!(a.decrypt(&x), b.decrypt(&y));
        assert!(a.decrypt(&x).iter().any(|&v| v != 1.0));
    }
}
