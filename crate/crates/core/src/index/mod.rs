//! In-process flat indices.
//!
//! [`HybridIndex`] stores a unit-norm dense vector and a sparse vector per
//! document and scores `alpha * dense + (1 - alpha) * sparse`; dense scoring is
//! an exhaustive scan and sparse scoring walks inverted postings.
//! [`FusedIndex`] stores one pre-combined unit vector per document and scores
//! by dot product. Both are exact: results equal a brute-force scan.

mod fused;
mod hybrid;

pub use fused::{FusedEntry, FusedIndex, FusedParams};
pub use hybrid::HybridIndex;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::by_score_then_id;
use crate::vector::DenseVec;

/// Query-time dense/sparse mixing weight of the hybrid index:
/// 0 is sparse-only, 1 is dense-only.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlphaHyb(f64);

impl AlphaHyb {
    pub const SPARSE: AlphaHyb = AlphaHyb(0.0);
    pub const DENSE: AlphaHyb = AlphaHyb(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::param(format!("alpha_hyb {value} outside [0, 1]")));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Result of a vector fetch: found vectors plus ids that were not stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Fetched {
    pub vectors: BTreeMap<String, DenseVec>,
    pub missing: Vec<String>,
}

/// Anything that can hand back a dense vector per document id.
pub trait VectorSource {
    fn vector(&self, doc_id: &str) -> Option<DenseVec>;

    fn fetch_vectors<'a, I>(&self, ids: I) -> Fetched
    where
        I: IntoIterator<Item = &'a str>,
        Self: Sized,
    {
        let mut out = Fetched::default();
        for id in ids {
            match self.vector(id) {
                Some(v) => {
                    out.vectors.insert(String::from(id), v);
                }
                None => out.missing.push(String::from(id)),
            }
        }
        out
    }
}

impl VectorSource for BTreeMap<String, DenseVec> {
    fn vector(&self, doc_id: &str) -> Option<DenseVec> {
        self.get(doc_id).cloned()
    }
}

/// Exact top-k over slot-indexed scores under the shared tie rule.
pub(crate) fn top_k_slots(ids: &[String], scores: &[f64], k: usize) -> Vec<(String, f64)> {
    let n = ids.len();
    let k = k.min(n);
    if k == 0 {
        return Vec::new();
    }
    let cmp = |a: &u32, b: &u32| {
        let (a, b) = (*a as usize, *b as usize);
        by_score_then_id(scores[a], &ids[a], scores[b], &ids[b])
    };
    let mut order: Vec<u32> = (0..n as u32).collect();
    if k < n {
        order.select_nth_unstable_by(k - 1, cmp);
        order.truncate(k);
    }
    order.sort_unstable_by(cmp);
    order
        .into_iter()
        .map(|slot| (ids[slot as usize].clone(), scores[slot as usize]))
        .collect()
}

pub(crate) fn check_top_k(top_k: usize) -> Result<()> {
    if top_k == 0 {
        return Err(Error::param("top_k must be at least 1"));
    }
    Ok(())
}

pub(crate) fn check_unit(doc_id: &str, v: &DenseVec, dim: usize, what: &str) -> Result<()> {
    let fail = |reason: String| Error::InvalidDocument {
        doc_id: String::from(doc_id),
        reason,
    };
    if v.dim() != dim {
        return Err(fail(format!("{what} vector has dimension {}, index expects {dim}", v.dim())));
    }
    let norm = v.norm();
    if norm == 0.0 {
        return Err(fail(format!("{what} vector has zero norm")));
    }
    if !v.is_unit() {
        return Err(fail(format!("{what} vector is not unit-norm (norm {norm})")));
    }
    Ok(())
}
