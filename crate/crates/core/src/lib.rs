//! Epsilon-covers of kernel range spaces.
//!
//! A query point `p` induces a signature `R_p = (K(p, x_1), …, K(p, x_n))`
//! against a point set `X`; two queries are close when their signatures are
//! close in the normalized L1 distance `d_Δ`. This crate builds finite query
//! sets covering every possible signature up to ε, shrinks the problem with
//! random cover-samples and terminal dimensionality reduction, and checks the
//! results with brute-force oracles.

pub mod covering;
pub mod error;
pub mod io;
pub mod kernels;
pub mod lowerbound;
pub mod oracle;
pub mod pipeline;
pub mod sampling;
pub mod signatures;
pub mod terminal_jl;

pub use covering::{Construction, Cover, CoverMeta, NetConfig, NetStrategy};
pub use error::{Error, Result};
pub use kernels::{KernelFamily, KernelSpec};
pub use signatures::{PointSet, Signature};
