//! Static depth accounting, checked before any ciphertext is touched.

use std::fmt;

use serde::Serialize;

use super::PathKind;
use crate::approx::{poly_depth, Comparator};
use crate::error::{Error, Result};
use crate::model::{KanLayer, KanModel};
use crate::spline::pack_depth;

/// Levels one named stage consumes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageDepth {
    pub stage: String,
    pub depth: usize,
}

/// Depth requirements of one layer. The two branches run side by side on
/// the same input, so the layer costs the deeper of the two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerPlan {
    pub spline: Vec<StageDepth>,
    pub silu: Vec<StageDepth>,
}

impl LayerPlan {
    pub fn for_layer(layer: &KanLayer, path: PathKind, comparator: &Comparator, slots: usize) -> Result<Self> {
        let n = layer.n_i();
        let kk = layer.grid().intervals();
        if n * kk > slots {
            return Err(Error::PackingOverflow {
                needed: n * kk,
                slots,
            });
        }
        let st = |s: &str, d: usize| StageDepth {
            stage: s.to_string(),
            depth: d,
        };
        let mut spline = vec![
            st("pack", pack_depth(n, kk, slots)),
            st("comparator", comparator.depth()),
        ];
        for j in 1..=layer.k() {
            spline.push(st(&format!("basis recursion {j}"), 1));
        }
        if path == PathKind::Naive {
            spline.push(st("permutation", 1));
        }
        spline.push(st("spline matvec", 1));
        let silu = vec![
            st("silu poly", poly_depth(layer.silu_poly())),
            st("silu matvec", 1),
        ];
        Ok(LayerPlan { spline, silu })
    }

    pub fn spline_depth(&self) -> usize {
        self.spline.iter().map(|s| s.depth).sum()
    }

    pub fn silu_depth(&self) -> usize {
        self.silu.iter().map(|s| s.depth).sum()
    }

    pub fn depth(&self) -> usize {
        self.spline_depth().max(self.silu_depth())
    }
}

impl fmt::Display for LayerPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[StageDepth]| {
            v.iter()
                .map(|s| format!("{} {}", s.stage, s.depth))
                .collect::<Vec<_>>()
                .join(" + ")
        };
        write!(
            f,
            "spline [{}] = {}, silu [{}] = {}",
            list(&self.spline),
            self.spline_depth(),
            list(&self.silu),
            self.silu_depth()
        )
    }
}

/// Per-layer plan plus where refreshes go.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthPlan {
    pub budget: usize,
    pub start_level: usize,
    pub layers: Vec<LayerPlan>,
    /// `refresh_before[l]`: the ciphertext is refreshed to full level before
    /// layer `l` runs.
    pub refresh_before: Vec<bool>,
}

impl DepthPlan {
    /// Plans `model` for a ciphertext entering at `start_level` on a backend
    /// with `budget` levels. Refreshing happens only when the next layer
    /// would otherwise run out of levels.
    pub fn new(
        model: &KanModel,
        path: PathKind,
        comparator: &Comparator,
        slots: usize,
        budget: usize,
        start_level: usize,
        bootstrap: bool,
    ) -> Result<Self> {
        let mut layers = Vec::with_capacity(model.layers().len());
        let mut refresh_before = Vec::with_capacity(model.layers().len());
        let mut level = start_level;
        for (l, layer) in model.layers().iter().enumerate() {
            let p = LayerPlan::for_layer(layer, path, comparator, slots)?;
            let d = p.depth();
            if d > budget {
                return Err(Error::DepthBudgetInfeasible(format!(
                    "layer {l} needs {d} levels, budget is {budget}: {p}"
                )));
            }
            let refresh = d > level;
            if refresh && !bootstrap {
                return Err(Error::DepthBudgetInfeasible(format!(
                    "layer {l} needs {d} levels, {level} left and bootstrapping is off: {p}"
                )));
            }
            if refresh {
                level = budget;
            }
            level -= d;
            refresh_before.push(refresh);
            layers.push(p);
        }
        Ok(DepthPlan {
            budget,
            start_level,
            layers,
            refresh_before,
        })
    }

    /// Sum of per-layer depths: the levels the whole pipeline consumes.
    pub fn total_depth(&self) -> usize {
        self.layers.iter().map(LayerPlan::depth).sum()
    }

    pub fn refreshes(&self) -> usize {
        self.refresh_before.iter().filter(|&&r| r).count()
    }
}

impl fmt::Display for DepthPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "depth plan (budget {}, start level {})", self.budget, self.start_level)?;
        for (l, (p, r)) in self.layers.iter().zip(&self.refresh_before).enumerate() {
            let tag = if *r { " (refresh first)" } else { "" };
            writeln!(f, "  layer {l}: {} levels{tag}; {p}", p.depth())?;
        }
        write!(f, "  total {} levels, {} refreshes", self.total_depth(), self.refreshes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::synth::{random_model, SynthSpec};

    #[test]
    fn deepest_naive_config_uses_the_whole_budget() {
        let (m, _) = random_model(1, &SynthSpec::new(&[4, 2], 10, 5)).unwrap();
        let cmp = Comparator::composite();
        let naive = DepthPlan::new(&m, PathKind::Naive, &cmp, 1 << 15, 20, 20, false).unwrap();
        assert_eq!(naive.total_depth(), 1 + 12 + 5 + 1 + 1);
        let lazy = DepthPlan::new(&m, PathKind::Lazy, &cmp, 1 << 15, 20, 20, false).unwrap();
        assert_eq!(lazy.total_depth(), 19);
        let e = DepthPlan::new(&m, PathKind::Naive, &cmp, 1 << 15, 19, 19, true).unwrap_err();
        assert!(matches!(e, Error::DepthBudgetInfeasible(ref s) if s.contains("comparator 12")));
    }

    #[test]
    fn refresh_placement() {
        let (m, _) = random_model(2, &SynthSpec::new(&[4, 3, 2], 3, 2)).unwrap();
        let cmp = Comparator::Exact;
        let p = DepthPlan::new(&m, PathKind::Lazy, &cmp, 256, 20, 20, true).unwrap();
        let d = p.layers[0].depth();
        assert_eq!(d, 1 + 1 + 2 + 1);
        assert_eq!(p.refresh_before, vec![false, false]);
        let p = DepthPlan::new(&m, PathKind::Lazy, &cmp, 256, 9, 9, true).unwrap();
        assert_eq!(p.refresh_before, vec![false, true]);
        assert!(DepthPlan::new(&m, PathKind::Lazy, &cmp, 256, 9, 9, false).is_err());
    }

    #[test]
    fn packing_feasibility() {
        let (m, _) = random_model(3, &SynthSpec::new(&[8, 2], 4, 2)).unwrap();
        // 8·(4 + 4) = 64 slots
        assert!(LayerPlan::for_layer(&m.layers()[0], PathKind::Lazy, &Comparator::Exact, 64).is_ok());
        assert!(matches!(
            LayerPlan::for_layer(&m.layers()[0], PathKind::Lazy, &Comparator::Exact, 32),
            Err(Error::PackingOverflow { needed: 64, slots: 32 })
        ));
    }
}
