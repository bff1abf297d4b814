//! Encrypted inference for Kolmogorov-Arnold networks over a leveled SIMD
//! ciphertext simulator.

pub mod approx;
pub mod error;
pub mod he;
pub mod inference;
pub mod model;
pub mod par;
pub mod spline;

pub use error::{Error, Result};
