//! Hybrid sparse/dense retrieval primitives.
//!
//! Everything in this crate is allocation-only (`alloc`) and free of IO, so it
//! can be embedded anywhere: the file formats, timing, CLI and HTTP service
//! live in the companion `hybridsearch` crate.
//!
//! The building blocks:
//!
//! - [`vector`]: dense and sparse vectors with 64-bit accumulation.
//! - [`index`]: an in-process hybrid index (dense + inverted sparse postings)
//!   and a dense-only index holding pre-combined projection vectors.
//! - [`projection`]: a seeded Achlioptas sparse random projection and the
//!   convex dense/projected vector combination.
//! - [`fusion`]: reciprocal rank fusion, MMR reranking and intra-list diversity.
//! - [`metrics`]: TREC-style nDCG/P/MRR/MAP/HitRate at a cutoff plus latency
//!   statistics.
//! - [`pipeline`]: the six retrieval configurations wired together.
//! - [`toy`]: a deterministic hashing encoder for tests and demos.

#![no_std]

extern crate alloc;

mod error;
pub mod fusion;
pub mod index;
pub mod metrics;
pub mod pipeline;
pub mod projection;
pub mod toy;
mod types;
pub mod vector;

pub use error::{Error, Result};
pub use types::{DocMeta, DocRecord, Hit, RankedList};
pub use vector::{cosine, dot, l2_normalize, sparse_dot, DenseVec, SparseVec};

/// Default dense embedding dimension.
pub const DENSE_DIM: usize = 768;

/// Default sparse vocabulary size (BERT WordPiece).
pub const VOCAB_DIM: u32 = 30_522;
