//! Plaintext KAN reference: layers, exact and mirrored forward passes,
//! least-squares fitting, JSON persistence and synthetic models.

mod fit;
mod forward;
mod io;
mod layer;
pub mod synth;

pub use crate::approx::silu;
pub use fit::{
    fit_activation, fit_layer_ls, read_csv_rows, BaseWeightMode, Dataset, FitOptions, FitSummary,
};
pub use forward::{layer_forward_plain, model_forward_plain, phi, ForwardMode};
pub use io::{load_model, model_from_json, model_to_json, save_model, MODEL_VERSION};
pub use layer::{ActStats, KanLayer, KanModel};
