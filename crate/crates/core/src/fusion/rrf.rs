use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::RankedList;

/// Reciprocal rank fusion parameters.
///
/// A document at 1-based rank `r` in list `i` contributes
/// `weights[i] / (k + r)`; lists that do not contain it contribute nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct RrfConfig {
    pub k: f64,
    /// One weight per input list, in input order.
    pub weights: Vec<f64>,
}

impl Default for RrfConfig {
    /// `k = 60`, weights `[0.6, 0.4]` for `[dense, sparse]`.
    fn default() -> Self {
        Self {
            k: 60.0,
            weights: vec![0.6, 0.4],
        }
    }
}

impl RrfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::param(format!("rrf k must be positive, got {}", self.k)));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::param("rrf weights must be non-negative"));
        }
        if !self.weights.iter().any(|w| *w > 0.0) {
            return Err(Error::param("at least one rrf weight must be positive"));
        }
        Ok(())
    }
}

/// Fuses ranked lists for one query, returning at most `limit` documents
/// ordered by fused score (ties by doc_id). Only ranks are used; input scores
/// are ignored.
pub fn rrf_fuse(lists: &[RankedList], config: &RrfConfig, limit: usize) -> Result<RankedList> {
    config.validate()?;
    if lists.len() != config.weights.len() {
        return Err(Error::param(format!(
            "{} ranked lists but {} rrf weights",
            lists.len(),
            config.weights.len()
        )));
    }
    let Some(first) = lists.first() else {
        return Err(Error::Empty("rrf input lists"));
    };
    for list in &lists[1..] {
        if list.query_id != first.query_id {
            return Err(Error::QueryIdMismatch {
                expected: first.query_id.clone(),
                found: list.query_id.clone(),
            });
        }
    }

    let mut fused: BTreeMap<&str, f64> = BTreeMap::new();
    for (list, &weight) in lists.iter().zip(&config.weights) {
        for hit in &list.hits {
            *fused.entry(hit.doc_id.as_str()).or_insert(0.0) += weight / (config.k + f64::from(hit.rank));
        }
    }
    let scored: Vec<(String, f64)> = fused
        .into_iter()
        .map(|(id, score)| (String::from(id), score))
        .collect();
    Ok(RankedList::from_scored(first.query_id.clone(), scored, limit))
}
