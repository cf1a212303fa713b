use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use super::{check_top_k, check_unit, top_k_slots, AlphaHyb, VectorSource};
use crate::error::{Error, Result};
use crate::types::{DocMeta, DocRecord, RankedList};
use crate::vector::{dot_slices, DenseVec, SparseVec};

/// Dense + sparse index with a query-time mixing weight.
///
/// Documents live in slots; dense vectors are packed row-major into one
/// buffer and sparse vectors are mirrored into per-term postings.
#[derive(Debug)]
pub struct HybridIndex {
    dense_dim: usize,
    vocab_dim: u32,
    ids: Vec<String>,
    slot_of: BTreeMap<String, u32>,
    dense: Vec<f32>,
    sparse: Vec<SparseVec>,
    meta: Vec<DocMeta>,
    postings: Vec<Vec<(u32, f32)>>,
    queries: AtomicU64,
}

impl HybridIndex {
    pub fn new(dense_dim: usize, vocab_dim: u32) -> Self {
        Self {
            dense_dim,
            vocab_dim,
            ids: Vec::new(),
            slot_of: BTreeMap::new(),
            dense: Vec::new(),
            sparse: Vec::new(),
            meta: Vec::new(),
            postings: vec![Vec::new(); vocab_dim as usize],
            queries: AtomicU64::new(0),
        }
    }

    pub fn dense_dim(&self) -> usize {
        self.dense_dim
    }

    pub fn vocab_dim(&self) -> u32 {
        self.vocab_dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.slot_of.contains_key(doc_id)
    }

    /// Number of retrieval queries served since construction.
    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    fn validate(&self, doc: &DocRecord) -> Result<()> {
        if doc.doc_id.is_empty() {
            return Err(Error::InvalidDocument {
                doc_id: doc.doc_id.clone(),
                reason: "empty doc_id".into(),
            });
        }
        check_unit(&doc.doc_id, &doc.dense, self.dense_dim, "dense")?;
        if doc.sparse.vocab_dim() != self.vocab_dim {
            return Err(Error::InvalidDocument {
                doc_id: doc.doc_id.clone(),
                reason: alloc::format!(
                    "sparse vocabulary {} does not match index vocabulary {}",
                    doc.sparse.vocab_dim(),
                    self.vocab_dim
                ),
            });
        }
        Ok(())
    }

    /// Inserts or replaces a batch. The batch is validated up front and either
    /// applied in full or rejected with the first offending document.
    /// Returns the number of distinct documents stored.
    pub fn upsert(&mut self, batch: &[DocRecord]) -> Result<usize> {
        if batch.is_empty() {
            return Err(Error::Empty("upsert batch"));
        }
        for doc in batch {
            self.validate(doc)?;
        }
        let mut distinct = BTreeMap::new();
        for doc in batch {
            distinct.insert(doc.doc_id.as_str(), ());
            self.put(doc);
        }
        Ok(distinct.len())
    }

    fn put(&mut self, doc: &DocRecord) {
        let dim = self.dense_dim;
        let slot = match self.slot_of.get(&doc.doc_id) {
            Some(&slot) => {
                let old = core::mem::replace(&mut self.sparse[slot as usize], doc.sparse.clone());
                for &term in old.indices() {
                    self.postings[term as usize].retain(|p| p.0 != slot);
                }
                let start = slot as usize * dim;
                self.dense[start..start + dim].copy_from_slice(doc.dense.as_slice());
                self.meta[slot as usize] = doc.meta.clone();
                slot
            }
            None => {
                let slot = self.ids.len() as u32;
                self.ids.push(doc.doc_id.clone());
                self.slot_of.insert(doc.doc_id.clone(), slot);
                self.dense.extend_from_slice(doc.dense.as_slice());
                self.sparse.push(doc.sparse.clone());
                self.meta.push(doc.meta.clone());
                slot
            }
        };
        for (term, value) in doc.sparse.iter() {
            self.postings[term as usize].push((slot, value));
        }
    }

    /// Scores every document as `alpha * dot(dense) + (1 - alpha) * sparse_dot`
    /// and returns the best `top_k`. A side whose weight is zero is not needed
    /// and may be `None`.
    pub fn query(
        &self,
        query_id: &str,
        dense: Option<&DenseVec>,
        sparse: Option<&SparseVec>,
        alpha: AlphaHyb,
        top_k: usize,
    ) -> Result<RankedList> {
        check_top_k(top_k)?;
        let a = alpha.value();
        let dense = if a > 0.0 {
            let d = dense.ok_or_else(|| Error::param("hybrid query with alpha > 0 needs a dense vector"))?;
            if d.dim() != self.dense_dim {
                return Err(Error::DimensionMismatch {
                    left: d.dim(),
                    right: self.dense_dim,
                });
            }
            Some(d)
        } else {
            None
        };
        let sparse = if a < 1.0 {
            let s = sparse.ok_or_else(|| Error::param("hybrid query with alpha < 1 needs a sparse vector"))?;
            if s.vocab_dim() != self.vocab_dim {
                return Err(Error::VocabMismatch {
                    left: s.vocab_dim(),
                    right: self.vocab_dim,
                });
            }
            Some(s)
        } else {
            None
        };
        self.queries.fetch_add(1, Ordering::Relaxed);

        let n = self.ids.len();
        let mut scores = vec![0.0f64; n];
        if let Some(d) = dense {
            let q = d.as_slice();
            for (slot, row) in self.dense.chunks_exact(self.dense_dim).enumerate() {
                scores[slot] = a * dot_slices(q, row);
            }
        }
        if let Some(s) = sparse {
            let mut acc = vec![0.0f64; n];
            for (term, qv) in s.iter() {
                let qv = f64::from(qv);
                for &(slot, v) in &self.postings[term as usize] {
                    acc[slot as usize] += qv * f64::from(v);
                }
            }
            let b = 1.0 - a;
            for (score, sp) in scores.iter_mut().zip(acc) {
                *score += b * sp;
            }
        }
        Ok(RankedList::from_ordered(
            query_id,
            top_k_slots(&self.ids, &scores, top_k),
        ))
    }

    pub fn meta(&self, doc_id: &str) -> Option<&DocMeta> {
        self.slot_of.get(doc_id).map(|&s| &self.meta[s as usize])
    }

    pub fn dense_slice(&self, doc_id: &str) -> Option<&[f32]> {
        self.slot_of.get(doc_id).map(|&s| {
            let start = s as usize * self.dense_dim;
            &self.dense[start..start + self.dense_dim]
        })
    }

    pub fn sparse(&self, doc_id: &str) -> Option<&SparseVec> {
        self.slot_of.get(doc_id).map(|&s| &self.sparse[s as usize])
    }

    /// Rebuilds a document's sparse vector from the inverted postings alone.
    pub fn reconstruct_sparse(&self, doc_id: &str) -> Option<SparseVec> {
        let slot = *self.slot_of.get(doc_id)?;
        let pairs: Vec<(u32, f32)> = self
            .postings
            .iter()
            .enumerate()
            .filter_map(|(term, list)| {
                list.iter()
                    .find(|p| p.0 == slot)
                    .map(|p| (term as u32, p.1))
            })
            .collect();
        SparseVec::from_pairs(self.vocab_dim, pairs).ok()
    }

    /// Total number of posting entries across all terms.
    pub fn posting_count(&self) -> usize {
        self.postings.iter().map(Vec::len).sum()
    }

    /// Documents in ascending doc_id order.
    pub fn records(&self) -> impl Iterator<Item = DocRecord> + '_ {
        self.slot_of.iter().map(move |(id, &slot)| {
            let start = slot as usize * self.dense_dim;
            DocRecord {
                doc_id: id.clone(),
                meta: self.meta[slot as usize].clone(),
                dense: DenseVec::new(self.dense[start..start + self.dense_dim].to_vec())
                    .expect("stored vectors are finite"),
                sparse: self.sparse[slot as usize].clone(),
                fused: None,
            }
        })
    }
}

impl VectorSource for HybridIndex {
    fn vector(&self, doc_id: &str) -> Option<DenseVec> {
        self.dense_slice(doc_id)
            .map(|s| DenseVec::new(s.to_vec()).expect("stored vectors are finite"))
    }
}
