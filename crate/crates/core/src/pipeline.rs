//! The six retrieval configurations.
//!
//! | method    | label  | stages                                                        |
//! |-----------|--------|---------------------------------------------------------------|
//! | `sparse`  | B1     | hybrid index, alpha_hyb = 0                                   |
//! | `dense`   | B2     | hybrid index, alpha_hyb = 1                                   |
//! | `rrf`     | B4     | dense and sparse passes of `candidates_k`, RRF, top `output_k` |
//! | `rrf_mmr` | B3     | B4's top `candidates_k`, MMR against the dense query           |
//! | `b5`      | B5     | one fused-index query with the combined query vector           |
//! | `b5_mmr`  | B5+MMR | B5's top `candidates_k`, MMR against the combined query vector |
//!
//! Each query runs in two stages, [`Engine::retrieve`] (vector preparation
//! and index passes) and [`Engine::finish`] (fusion and reranking), so callers
//! can time them separately.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::fusion::{mmr_rerank, rrf_fuse, MmrConfig, RrfConfig};
use crate::index::{AlphaHyb, FusedIndex, HybridIndex, VectorSource};
use crate::projection::{combine, AlphaMix, ProjectionMatrix};
use crate::types::RankedList;
use crate::vector::{DenseVec, SparseVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Sparse,
    Dense,
    Rrf,
    RrfMmr,
    B5,
    B5Mmr,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Sparse,
        Method::Dense,
        Method::Rrf,
        Method::RrfMmr,
        Method::B5,
        Method::B5Mmr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sparse => "sparse",
            Method::Dense => "dense",
            Method::Rrf => "rrf",
            Method::RrfMmr => "rrf_mmr",
            Method::B5 => "b5",
            Method::B5Mmr => "b5_mmr",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Sparse => "B1",
            Method::Dense => "B2",
            Method::Rrf => "B4",
            Method::RrfMmr => "B3",
            Method::B5 => "B5",
            Method::B5Mmr => "B5+MMR",
        }
    }

    pub fn uses_mmr(self) -> bool {
        matches!(self, Method::RrfMmr | Method::B5Mmr)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts method names (`rrf_mmr`) and labels (`B3`, `b5+mmr`).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == lower || m.label().eq_ignore_ascii_case(&lower))
            .ok_or_else(|| {
                Error::param(format!(
                    "unknown method {s:?}; expected one of sparse, dense, rrf, rrf_mmr, b5, b5_mmr"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub method: Method,
    /// Candidates per index pass (and the MMR pool) for multi-stage methods.
    pub candidates_k: usize,
    pub output_k: usize,
    pub rrf: RrfConfig,
    pub mmr: MmrConfig,
    pub alpha_query: AlphaMix,
    /// Replaces the fixed 0 / 1 mix of the sparse and dense methods.
    pub alpha_hyb: Option<AlphaHyb>,
}

impl PipelineConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            candidates_k: 50,
            output_k: 10,
            rrf: RrfConfig::default(),
            mmr: MmrConfig::default(),
            alpha_query: AlphaMix::default(),
            alpha_hyb: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.output_k == 0 {
            return Err(Error::param("output_k must be at least 1"));
        }
        if self.output_k > self.candidates_k {
            return Err(Error::param(format!(
                "output_k {} exceeds candidates_k {}",
                self.output_k, self.candidates_k
            )));
        }
        if self.rrf.weights.len() != 2 {
            return Err(Error::param("rrf needs exactly two weights: [dense, sparse]"));
        }
        self.rrf.validate()?;
        if !(0.0..=1.0).contains(&self.mmr.lambda) {
            return Err(Error::param(format!("lambda {} outside [0, 1]", self.mmr.lambda)));
        }
        if self.mmr.pool_size == 0 {
            return Err(Error::param("mmr pool size must be at least 1"));
        }
        Ok(())
    }

    fn hybrid_alpha(&self) -> Option<AlphaHyb> {
        match self.method {
            Method::Sparse => Some(self.alpha_hyb.unwrap_or(AlphaHyb::SPARSE)),
            Method::Dense => Some(self.alpha_hyb.unwrap_or(AlphaHyb::DENSE)),
            _ => None,
        }
    }

    /// Which query vectors the method reads: `(dense, sparse)`.
    pub fn required_vectors(&self) -> (bool, bool) {
        match self.hybrid_alpha() {
            Some(a) => (a.value() > 0.0, a.value() < 1.0),
            None => (true, true),
        }
    }

    fn mmr_config(&self) -> MmrConfig {
        let pool = self.candidates_k.min(self.mmr.pool_size);
        MmrConfig {
            lambda: self.mmr.lambda,
            pool_size: pool,
            output_size: self.output_k.min(pool),
            relevance: self.mmr.relevance,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct QueryVectors<'a> {
    pub dense: Option<&'a DenseVec>,
    pub sparse: Option<&'a SparseVec>,
}

/// Output of the retrieval stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Retrieved {
    /// One list for single-pass methods; `[dense, sparse]` for the RRF ones.
    pub lists: Vec<RankedList>,
    /// The vector MMR measures relevance against, for the MMR methods.
    pub reference: Option<DenseVec>,
}

/// The three structures every query runs against.
#[derive(Debug, Clone, Copy)]
pub struct Engine<'a> {
    pub hybrid: &'a HybridIndex,
    pub fused: &'a FusedIndex,
    pub projection: &'a ProjectionMatrix,
}

impl<'a> Engine<'a> {
    /// Checks that the pieces were built for each other, including that the
    /// fused index was built with this projection seed.
    pub fn new(hybrid: &'a HybridIndex, fused: &'a FusedIndex, projection: &'a ProjectionMatrix) -> Result<Self> {
        if fused.params().seed != projection.seed() {
            return Err(Error::param(format!(
                "projection seed {} does not match the fused index seed {}",
                projection.seed(),
                fused.params().seed
            )));
        }
        if projection.rows() != hybrid.dense_dim() || fused.dim() != hybrid.dense_dim() {
            return Err(Error::DimensionMismatch {
                left: projection.rows(),
                right: hybrid.dense_dim(),
            });
        }
        if projection.cols() != hybrid.vocab_dim() {
            return Err(Error::VocabMismatch {
                left: projection.cols(),
                right: hybrid.vocab_dim(),
            });
        }
        Ok(Self {
            hybrid,
            fused,
            projection,
        })
    }

    /// `normalize(alpha * d_hat + (1 - alpha) * normalize(R s))`.
    pub fn fused_query_vector(&self, dense: &DenseVec, sparse: &SparseVec, alpha: AlphaMix) -> Result<DenseVec> {
        let p = self.projection.project(sparse)?;
        combine(dense, &p, alpha)
    }

    pub fn retrieve(&self, cfg: &PipelineConfig, query_id: &str, q: QueryVectors<'_>) -> Result<Retrieved> {
        cfg.validate()?;
        let method = cfg.method.name();
        let (need_dense, need_sparse) = cfg.required_vectors();
        let dense = match (need_dense, q.dense) {
            (true, None) => return Err(Error::MissingQueryVector { method, side: "dense" }),
            (_, d) => d,
        };
        let sparse = match (need_sparse, q.sparse) {
            (true, None) => return Err(Error::MissingQueryVector { method, side: "sparse" }),
            (_, s) => s,
        };

        if let Some(alpha) = cfg.hybrid_alpha() {
            let list = self.hybrid.query(query_id, dense, sparse, alpha, cfg.output_k)?;
            return Ok(Retrieved {
                lists: vec![list],
                reference: None,
            });
        }
        let (dense, sparse) = (dense.expect("checked"), sparse.expect("checked"));
        match cfg.method {
            Method::Rrf | Method::RrfMmr => {
                let d = self
                    .hybrid
                    .query(query_id, Some(dense), None, AlphaHyb::DENSE, cfg.candidates_k)?;
                let s = self
                    .hybrid
                    .query(query_id, None, Some(sparse), AlphaHyb::SPARSE, cfg.candidates_k)?;
                Ok(Retrieved {
                    lists: vec![d, s],
                    reference: (cfg.method == Method::RrfMmr).then(|| dense.clone()),
                })
            }
            Method::B5 | Method::B5Mmr => {
                let q = self.fused_query_vector(dense, sparse, cfg.alpha_query)?;
                let k = if cfg.method == Method::B5 {
                    cfg.output_k
                } else {
                    cfg.candidates_k
                };
                let list = self.fused.query(query_id, &q, k)?;
                Ok(Retrieved {
                    lists: vec![list],
                    reference: (cfg.method == Method::B5Mmr).then_some(q),
                })
            }
            Method::Sparse | Method::Dense => unreachable!("handled above"),
        }
    }

    pub fn finish(&self, cfg: &PipelineConfig, retrieved: Retrieved) -> Result<RankedList> {
        let Retrieved { mut lists, reference } = retrieved;
        match cfg.method {
            Method::Sparse | Method::Dense | Method::B5 => Ok(lists.swap_remove(0)),
            Method::Rrf => rrf_fuse(&lists, &cfg.rrf, cfg.output_k),
            Method::RrfMmr => {
                let pool = rrf_fuse(&lists, &cfg.rrf, cfg.candidates_k)?;
                let reference = reference.ok_or(Error::MissingQueryVector {
                    method: cfg.method.name(),
                    side: "dense",
                })?;
                self.rerank(&pool, &reference, self.hybrid, cfg)
            }
            Method::B5Mmr => {
                let pool = lists.swap_remove(0);
                let reference = reference.ok_or(Error::MissingQueryVector {
                    method: cfg.method.name(),
                    side: "dense",
                })?;
                self.rerank(&pool, &reference, self.fused, cfg)
            }
        }
    }

    fn rerank<V: VectorSource>(
        &self,
        pool: &RankedList,
        reference: &DenseVec,
        source: &V,
        cfg: &PipelineConfig,
    ) -> Result<RankedList> {
        if pool.is_empty() {
            return Ok(pool.clone());
        }
        let mmr = cfg.mmr_config();
        let fetched = source.fetch_vectors(pool.hits.iter().take(mmr.pool_size).map(|h| h.doc_id.as_str()));
        if let Some(missing) = fetched.missing.first() {
            return Err(Error::MissingVector(String::from(missing)));
        }
        mmr_rerank(pool, reference, &fetched.vectors, &mmr)
    }

    pub fn run(&self, cfg: &PipelineConfig, query_id: &str, q: QueryVectors<'_>) -> Result<RankedList> {
        let retrieved = self.retrieve(cfg, query_id, q)?;
        self.finish(cfg, retrieved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert_eq!("B5+mmr".parse::<Method>().unwrap(), Method::B5Mmr);
        assert!("b6".parse::<Method>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = PipelineConfig::new(Method::Rrf);
        cfg.validate().unwrap();
        cfg.output_k = 60;
        assert!(cfg.validate().is_err());
        cfg.output_k = 10;
        cfg.mmr.lambda = 1.3;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn required_vectors() {
        assert_eq!(PipelineConfig::new(Method::Sparse).required_vectors(), (false, true));
        assert_eq!(PipelineConfig::new(Method::Dense).required_vectors(), (true, false));
        assert_eq!(PipelineConfig::new(Method::B5).required_vectors(), (true, true));
        let mut mixed = PipelineConfig::new(Method::Sparse);
        mixed.alpha_hyb = Some(AlphaHyb::new(0.3).unwrap());
        assert_eq!(mixed.required_vectors(), (true, true));
    }
}
