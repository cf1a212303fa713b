//! Ingestion, evaluation and serving around [`hybridsearch_core`].
//!
//! - [`formats`]: TREC qrels/run files, JSONL corpus and query files, binary
//!   index snapshots and metric report rendering.
//! - [`ingest`]: checkpointed, resumable corpus ingestion into both indices.
//! - [`store`]: loading a built index directory.
//! - [`runner`]: timed query execution, batches, alpha sweeps, latency bench.
//! - [`synth`]: clustered synthetic corpora for tests and benchmarks.
//! - [`service`]: the HTTP API.

pub mod error;
pub mod formats;
pub mod ingest;
pub mod runner;
pub mod service;
pub mod store;
pub mod synth;

pub use error::{Error, Result};
pub use hybridsearch_core as core;
