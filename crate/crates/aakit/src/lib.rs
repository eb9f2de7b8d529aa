//! Archetypal analysis at scale.
//!
//! The exact problem factors a d×N data matrix as X ≈ X·A·B with both
//! coefficient matrices column-stochastic; the columns of X·A are the
//! archetypes, vertices of a polytope inside the convex hull of the data.
//! This crate implements the alternating-minimization solver together with
//! two randomized reductions — a block-Krylov sketch that shrinks the
//! dimension and a random-projection approximate convex hull that shrinks
//! the dictionary — plus their composition, an end-to-end approximate
//! pipeline.
//!
//! Entry points:
//! - [`aa::fit`] — alternating minimization over the data or a dictionary
//! - [`rsvd::block_krylov_sketch`] — randomized low-rank reduction
//! - [`hull::approx_convex_hull`] — curvature-ranked candidate selection
//! - [`pipeline::fit_aaa`] / [`pipeline::fit_svd_aa`] — the approximate
//!   pipeline and the exact-SVD baseline
//!
//! The `examples/` directory has one runnable program per capability; the
//! `aakit` binary exposes the same flows as subcommands.

pub mod aa;
pub mod cli;
pub mod decomp;
pub mod error;
pub mod hull;
pub mod io;
pub mod matrix;
pub mod pipeline;
pub mod qp;
pub mod reference;
pub mod rng;
pub mod rsvd;
pub mod synth;

pub use aa::{fit, kmeans_init, update_a_gauss_seidel, update_b, AAConfig, AAModel};
pub use decomp::{qr_householder, spectral_norm, svd_dense, SVDFactors};
pub use error::{Error, Result};
pub use hull::{
    approx_convex_hull, estimate_hit_counts, exact_curvature_2d, hausdorff_to_subhull,
    sample_sphere_direction, select_support, HitCounts, HullSupport,
};
pub use matrix::{aa_objective, matmul, DenseMatrix, StochasticMatrix};
pub use pipeline::{
    explained_variance, fit_aaa, fit_svd_aa, fit_svd_aa_detailed, AAAConfig, AAAResult,
};
pub use qp::{project_onto_simplex, simplex_lsq, QPSolution, SimplexLsq, SimplexVector};
pub use rng::CounterRng;
pub use rsvd::{block_krylov_sketch, krylov_default_s, SketchResult};
