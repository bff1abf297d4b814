//! B-spline machinery: knot grids, the plaintext Cox-de Boor oracle,
//! repeat packing, encrypted basis evaluation and layout permutations.

mod basis;
mod basis_he;
mod grid;
mod packing;
mod permutation;

pub use basis::{bspline_basis_plain, spline_value};
pub use basis_he::{basis_depth, bspline_basis_he, bspline_basis_mirrored, BasisVector};
pub(crate) use basis_he::tag_stage;
pub use grid::{GridMatrix, GridSpec, UniformGrid, BOUND_HEADROOM};
pub use packing::{
    naive_repeat_pack, pack_depth, pack_rotations, pack_wraps, repeat_pack, repeat_pack_scaled, PackedInput,
};
pub use permutation::{fuse_weights, gen_permutation, PermutationSpec};
