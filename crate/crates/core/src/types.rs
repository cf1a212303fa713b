use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::vector::{DenseVec, SparseVec};

/// Display metadata carried alongside a document's vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocMeta {
    pub title: String,
    pub abstract_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocRecord {
    pub doc_id: String,
    pub meta: DocMeta,
    pub dense: DenseVec,
    pub sparse: SparseVec,
    /// Pre-combined projection-fusion vector, filled in at ingest.
    pub fused: Option<DenseVec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub doc_id: String,
    pub score: f64,
    pub rank: u32,
}

/// Ordered hits for one query. Ranks run 1..=n with no gaps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedList {
    pub query_id: String,
    pub hits: Vec<Hit>,
}

/// Ranking order: score descending, then doc_id ascending.
pub(crate) fn by_score_then_id(a_score: f64, a_id: &str, b_score: f64, b_id: &str) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_id.cmp(b_id))
}

impl RankedList {
    pub fn new(query_id: impl Into<String>) -> Self {
        Self {
            query_id: query_id.into(),
            hits: Vec::new(),
        }
    }

    /// Sorts `(doc_id, score)` pairs into a ranked list, keeping at most
    /// `limit` entries.
    pub fn from_scored(query_id: impl Into<String>, mut scored: Vec<(String, f64)>, limit: usize) -> Self {
        scored.sort_by(|a, b| by_score_then_id(a.1, &a.0, b.1, &b.0));
        scored.truncate(limit);
        Self::from_ordered(query_id, scored)
    }

    /// Assigns ranks 1..=n to already ordered `(doc_id, score)` pairs.
    pub fn from_ordered(query_id: impl Into<String>, ordered: Vec<(String, f64)>) -> Self {
        let hits = ordered
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, score))| Hit {
                doc_id,
                score,
                rank: i as u32 + 1,
            })
            .collect();
        Self {
            query_id: query_id.into(),
            hits,
        }
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.hits.iter().map(|h| h.doc_id.as_str())
    }

    pub fn truncate(&mut self, len: usize) {
        self.hits.truncate(len);
    }

    /// Checks the structural invariants: ranks 1..=n in order and no
    /// duplicate documents.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (i, hit) in self.hits.iter().enumerate() {
            if hit.rank as usize != i + 1 {
                return Err(Error::param(format!(
                    "query {}: hit {} has rank {}, expected {}",
                    self.query_id,
                    hit.doc_id,
                    hit.rank,
                    i + 1
                )));
            }
            if !seen.insert(hit.doc_id.as_str()) {
                return Err(Error::param(format!(
                    "query {}: duplicate document {}",
                    self.query_id, hit.doc_id
                )));
            }
        }
        Ok(())
    }
}
