use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use super::{check_top_k, check_unit, top_k_slots, VectorSource};
use crate::error::{Error, Result};
use crate::types::{DocMeta, RankedList};
use crate::vector::{dot_slices, DenseVec};

/// Parameters the stored vectors were built with. Query-side fusion must use
/// the same projection seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedParams {
    pub seed: u64,
    pub alpha_doc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedEntry {
    pub doc_id: String,
    pub meta: DocMeta,
    pub vector: DenseVec,
}

/// Dense-only dot-product index over pre-combined fusion vectors.
#[derive(Debug)]
pub struct FusedIndex {
    dim: usize,
    params: FusedParams,
    ids: Vec<String>,
    slot_of: BTreeMap<String, u32>,
    vectors: Vec<f32>,
    meta: Vec<DocMeta>,
    queries: AtomicU64,
}

impl FusedIndex {
    pub fn new(dim: usize, params: FusedParams) -> Self {
        Self {
            dim,
            params,
            ids: Vec::new(),
            slot_of: BTreeMap::new(),
            vectors: Vec::new(),
            meta: Vec::new(),
            queries: AtomicU64::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> FusedParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn upsert(&mut self, batch: &[FusedEntry]) -> Result<usize> {
        if batch.is_empty() {
            return Err(Error::Empty("upsert batch"));
        }
        for entry in batch {
            check_unit(&entry.doc_id, &entry.vector, self.dim, "fused")?;
        }
        let mut distinct = BTreeMap::new();
        for entry in batch {
            distinct.insert(entry.doc_id.as_str(), ());
            match self.slot_of.get(&entry.doc_id) {
                Some(&slot) => {
                    let start = slot as usize * self.dim;
                    self.vectors[start..start + self.dim].copy_from_slice(entry.vector.as_slice());
                    self.meta[slot as usize] = entry.meta.clone();
                }
                None => {
                    self.slot_of.insert(entry.doc_id.clone(), self.ids.len() as u32);
                    self.ids.push(entry.doc_id.clone());
                    self.vectors.extend_from_slice(entry.vector.as_slice());
                    self.meta.push(entry.meta.clone());
                }
            }
        }
        Ok(distinct.len())
    }

    /// Single dot-product pass over every stored vector.
    pub fn query(&self, query_id: &str, q: &DenseVec, top_k: usize) -> Result<RankedList> {
        check_top_k(top_k)?;
        if q.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: q.dim(),
                right: self.dim,
            });
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        let q = q.as_slice();
        let scores: Vec<f64> = self
            .vectors
            .chunks_exact(self.dim)
            .map(|row| dot_slices(q, row))
            .collect();
        Ok(RankedList::from_ordered(
            query_id,
            top_k_slots(&self.ids, &scores, top_k),
        ))
    }

    pub fn meta(&self, doc_id: &str) -> Option<&DocMeta> {
        self.slot_of.get(doc_id).map(|&s| &self.meta[s as usize])
    }

    pub fn vector_slice(&self, doc_id: &str) -> Option<&[f32]> {
        self.slot_of.get(doc_id).map(|&s| {
            let start = s as usize * self.dim;
            &self.vectors[start..start + self.dim]
        })
    }

    /// Entries in ascending doc_id order.
    pub fn entries(&self) -> impl Iterator<Item = FusedEntry> + '_ {
        self.slot_of.iter().map(move |(id, &slot)| {
            let start = slot as usize * self.dim;
            FusedEntry {
                doc_id: id.clone(),
                meta: self.meta[slot as usize].clone(),
                vector: DenseVec::new(self.vectors[start..start + self.dim].to_vec())
                    .expect("stored vectors are finite"),
            }
        })
    }
}

impl VectorSource for FusedIndex {
    fn vector(&self, doc_id: &str) -> Option<DenseVec> {
        self.vector_slice(doc_id)
            .map(|s| DenseVec::new(s.to_vec()).expect("stored vectors are finite"))
    }
}
