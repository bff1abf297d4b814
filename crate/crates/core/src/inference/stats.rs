use serde::{Deserialize, Serialize};

use crate::he::OpCounter;

/// Operation tally of one layer (or of a whole run, in `InferenceStats::total`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub rotations: u64,
    pub ct_mults: u64,
    pub pt_mults: u64,
    pub adds: u64,
    pub subs: u64,
    pub refreshes: u64,
    /// Levels between the layer's input and its output.
    pub depth_consumed: usize,
    pub wall_time_ms: f64,
}

impl LayerStats {
    pub fn from_counter(c: &OpCounter, depth_consumed: usize, wall_time_ms: f64) -> Self {
        LayerStats {
            rotations: c.rotations,
            ct_mults: c.ct_mults,
            pt_mults: c.pt_mults,
            adds: c.adds,
            subs: c.subs,
            refreshes: c.refreshes,
            depth_consumed,
            wall_time_ms,
        }
    }

    pub fn mults(&self) -> u64 {
        self.ct_mults + self.pt_mults
    }

    /// Rotations plus multiplications.
    pub fn weighted_ops(&self) -> u64 {
        self.rotations + self.mults()
    }

    /// Counters only; wall time is left out so runs can be compared.
    pub fn same_counts(&self, o: &LayerStats) -> bool {
        let strip = |s: &LayerStats| LayerStats { wall_time_ms: 0.0, ..*s };
        strip(self) == strip(o)
    }
}

impl std::ops::AddAssign for LayerStats {
    fn add_assign(&mut self, o: LayerStats) {
        self.rotations += o.rotations;
        self.ct_mults += o.ct_mults;
        self.pt_mults += o.pt_mults;
        self.adds += o.adds;
        self.subs += o.subs;
        self.refreshes += o.refreshes;
        self.depth_consumed += o.depth_consumed;
        self.wall_time_ms += o.wall_time_ms;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InferenceStats {
    pub layers: Vec<LayerStats>,
    /// Sum over layers; `depth_consumed` is the total across refreshes.
    pub total: LayerStats,
}

impl InferenceStats {
    pub fn from_layers(layers: Vec<LayerStats>) -> Self {
        let mut total = LayerStats::default();
        for l in &layers {
            total += *l;
        }
        InferenceStats { layers, total }
    }

    pub fn same_counts(&self, o: &InferenceStats) -> bool {
        self.layers.len() == o.layers.len()
            && self.layers.iter().zip(&o.layers).all(|(a, b)| a.same_counts(b))
    }
}
