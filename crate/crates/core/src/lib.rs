//! Micro-expression recognition from dynamic images.
//!
//! The crate turns an ordered sequence of face frames into a single
//! *dynamic image* by rank pooling ([`rankpool`]) and classifies it with
//! LEARNet, a lateral accretive multi-path CNN ([`graph`]), built from
//! hand-written primitives ([`ops`]) and trained with plain SGD
//! ([`train`]). [`data`] handles frames, manifests, the synthetic corpus
//! and checkpoints.
//!
//! All computation runs on the CPU and is deterministic: identical inputs
//! and seeds give bit-identical results regardless of thread count.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
mod error;
mod gemm;
pub mod graph;
pub mod ops;
pub mod rankpool;
mod tensor;
pub mod train;

pub use error::{CheckpointError, Error, Result};
pub use tensor::Tensor;
