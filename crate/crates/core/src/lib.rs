//! Grid laboratory for the uncentered Hardy–Littlewood maximal operator on
//! block-decreasing functions.
//!
//! The crate is generic over the sample type through [`Scalar`]; the
//! `*64`/`*32` aliases below are what applications normally use.
//!
//! ```
//! use maxreg_core::{generate, maximal_bd_pruned, variation_directional, Extension, Grid64,
//!                   NormSpec, ProfileSpec};
//!
//! let grid = Grid64::new(2, &[2.0, 2.0], 1.0 / 16.0).unwrap();
//! let square = generate(&ProfileSpec::Square { side: 1.0 }, &grid).unwrap();
//! let m = maximal_bd_pruned(&square, &NormSpec::Linf, None, Extension::Constant).unwrap();
//! let v = variation_directional(&m.to_grid_function(1.0).unwrap(), Extension::Constant);
//! assert!(v.directional_sum.is_finite());
//! ```

// `!(x > 0)` also rejects NaN, and axis loops index several parallel arrays.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod accum;
pub mod bdgen;
pub mod error;
pub mod grid;
pub mod maxop;
pub mod norms;
pub mod scalar;
pub mod variation;

pub use bdgen::{
    check_block_decreasing, corpus_for_dim, default_corpus, generate, jump_estimate, max_jump_near,
    precise_rep, BdCheck, BdViolation, Face, JumpEstimate, Profile1d, ProfileSpec, ViolationKind,
};
pub use error::{Error, Result};
pub use grid::{read_csv, sample, write_csv, Extension, Grid, GridFunction};
pub use maxop::{
    ball_average, enk_classify, maximal_bd_pruned, maximal_bd_pruned_with, maximal_brute, maximal_centered,
    Centering, MaxField, MaxRecord, PruneRule,
};
pub use norms::{ladder_steps, mu, radius_ladder, stencil, BallStencil, NormSpec};
pub use scalar::Scalar;
pub use variation::{
    partial_variation, variation_1d, variation_bd_boundary, variation_directional, variation_of_field,
    variation_report, GridMeta, VariationReport,
};

pub type Grid64 = Grid<f64>;
pub type GridFunction64 = GridFunction<f64>;
pub type MaxField64 = MaxField<f64>;
pub type NormSpec64 = NormSpec<f64>;
pub type ProfileSpec64 = ProfileSpec<f64>;

pub type Grid32 = Grid<f32>;
pub type GridFunction32 = GridFunction<f32>;
pub type MaxField32 = MaxField<f32>;
pub type NormSpec32 = NormSpec<f32>;
pub type ProfileSpec32 = ProfileSpec<f32>;
