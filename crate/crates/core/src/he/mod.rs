//! Leveled SIMD homomorphic-encryption simulator.
//!
//! Ciphertexts are real slot vectors with an integer level. Multiplications
//! (ciphertext or plaintext operand) consume one level; additions and
//! rotations are free. Every backend counts its operations in an
//! [`OpCounter`].

mod backend;
mod ciphertext;
mod config;
mod counter;

pub use backend::{
    backend_from_config, Backend, Cleartext, GaussianNoise, NoNoise, NoiseModel, Noisy, Operand,
    Simulator, SlotOp,
};
pub use ciphertext::{CipherText, PlainVector};
pub use config::BackendConfig;
pub use counter::OpCounter;
