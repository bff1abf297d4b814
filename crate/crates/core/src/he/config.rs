use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the simulated leveled SIMD scheme.
///
/// `slot_count` plays the role of N/2 and `depth_budget` the number of
/// rescalings available to a freshly encrypted ciphertext.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub slot_count: usize,
    pub depth_budget: usize,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Default for BackendConfig {
    /// Ring degree 2^16 (2^15 slots) with depth 20.
    fn default() -> Self {
        BackendConfig {
            slot_count: 1 << 15,
            depth_budget: 20,
            noise_std: 0.0,
            rng_seed: 0,
        }
    }
}

impl BackendConfig {
    pub fn new(slot_count: usize, depth_budget: usize) -> Self {
        BackendConfig {
            slot_count,
            depth_budget,
            noise_std: 0.0,
            rng_seed: 0,
        }
    }

    pub fn with_noise(mut self, noise_std: f64, rng_seed: u64) -> Self {
        self.noise_std = noise_std;
        self.rng_seed = rng_seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.slot_count == 0 || !self.slot_count.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "slot_count {} is not a positive power of two",
                self.slot_count
            )));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "noise_std {} must be finite and non-negative",
                self.noise_std
            )));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: BackendConfig =
            serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}
