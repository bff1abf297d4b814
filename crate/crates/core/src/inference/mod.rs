//! Encrypted KAN inference: BSGS matrix products, depth planning, the
//! lazy and naive layer pipelines and counter-based benchmarking.

mod bench;
mod matvec;
mod pipeline;
mod plan;
mod stats;

pub use bench::{bench_compare, BenchConfig, BenchReport, BenchRow, BenchShape};
pub use matvec::{bsgs_matvec, default_split, matvec_cost, MatrixView, MatvecCost, MatvecLayout};
pub use pipeline::{
    encrypt_input, infer, infer_batch, layer_forward_he, model_forward_he, InferenceResult, PathKind,
    PipelineConfig,
};
pub use plan::{DepthPlan, LayerPlan, StageDepth};
pub use stats::{InferenceStats, LayerStats};
