//! Rank fusion, diversity reranking and the intra-list diversity statistic.

mod diversity;
mod mmr;
mod rrf;

pub use diversity::{ild_at_k, Ild};
pub use mmr::{mmr_rerank, MmrConfig, Relevance};
pub use rrf::{rrf_fuse, RrfConfig};
