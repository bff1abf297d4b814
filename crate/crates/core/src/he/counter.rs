use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

/// Tally of homomorphic operations performed by one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounter {
    pub adds: u64,
    pub subs: u64,
    pub ct_mults: u64,
    pub pt_mults: u64,
    pub rotations: u64,
    pub refreshes: u64,
    /// Deepest point reached, measured from the depth budget.
    pub max_depth_consumed: usize,
}

impl OpCounter {
    pub fn mults(&self) -> u64 {
        self.ct_mults + self.pt_mults
    }

    /// Rotations plus multiplications of both kinds: the cost figure used
    /// to compare evaluation strategies.
    pub fn weighted_ops(&self) -> u64 {
        self.rotations + self.mults()
    }

    /// Combines counters from independent evaluations at a join point.
    pub fn merge(&mut self, other: &OpCounter) {
        *self += *other;
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, o: OpCounter) {
        self.adds += o.adds;
        self.subs += o.subs;
        self.ct_mults += o.ct_mults;
        self.pt_mults += o.pt_mults;
        self.rotations += o.rotations;
        self.refreshes += o.refreshes;
        self.max_depth_consumed = self.max_depth_consumed.max(o.max_depth_consumed);
    }
}

impl Add for OpCounter {
    type Output = OpCounter;

    fn add(mut self, o: OpCounter) -> OpCounter {
        self += o;
        self
    }
}

/// Difference of two snapshots taken from the same monotone counter.
/// `max_depth_consumed` keeps the later value.
impl Sub for OpCounter {
    type Output = OpCounter;

    fn sub(self, o: OpCounter) -> OpCounter {
        OpCounter {
            adds: self.adds - o.adds,
            subs: self.subs - o.subs,
            ct_mults: self.ct_mults - o.ct_mults,
            pt_mults: self.pt_mults - o.pt_mults,
            rotations: self.rotations - o.rotations,
            refreshes: self.refreshes - o.refreshes,
            max_depth_consumed: self.max_depth_consumed,
        }
    }
}
