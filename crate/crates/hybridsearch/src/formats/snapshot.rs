//! Binary index snapshots.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! header
//!   magic        8 bytes  "HSSNAP\0\0"
//!   version      u32      1
//!   kind         u32      1 = hybrid, 2 = fused
//!   dense_dim    u32
//!   vocab_dim    u32
//!   seed         u64      projection seed
//!   alpha_doc    f64
//!   encoder      u32      0 = precomputed, 1 = toy
//!   toy_seed     u64
//!   count        u64      number of records
//! record (ascending doc_id)
//!   doc_id, title, abstract   u32 byte length + UTF-8
//!   hybrid: dense f32 x dense_dim, nnz u32, indices u32 x nnz, values f32 x nnz
//!   fused:  vector f32 x dense_dim
//! ```
//!
//! Records are sorted, so two indices with the same contents produce
//! byte-identical snapshots regardless of insertion order.

use std::path::Path;

use hybridsearch_core::index::{FusedEntry, FusedIndex, FusedParams, HybridIndex};
use hybridsearch_core::{DenseVec, DocMeta, DocRecord, SparseVec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"HSSNAP\0\0";
pub const VERSION: u32 = 1;
const KIND_HYBRID: u32 = 1;
const KIND_FUSED: u32 = 2;
const LOAD_CHUNK: usize = 1000;

/// How query and document text is turned into vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderMode {
    /// Vectors come with the input; text alone cannot be searched.
    Precomputed,
    /// The deterministic hashing encoder fills in missing vectors.
    Toy,
}

/// Build parameters recorded with every index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexMeta {
    pub dense_dim: usize,
    pub vocab_dim: u32,
    pub seed: u64,
    pub alpha_doc: f64,
    pub encoder: EncoderMode,
    pub toy_seed: u64,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Default)]
pub(crate) struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }
    pub fn f32s(&mut self, v: &[f32]) {
        for x in v {
            self.buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    pub fn u32s(&mut self, v: &[u32]) {
        for x in v {
            self.u32(*x);
        }
    }

    pub fn header(&mut self, kind: u32, meta: &IndexMeta, count: usize) {
        self.buf.extend_from_slice(MAGIC);
        self.u32(VERSION);
        self.u32(kind);
        self.u32(meta.dense_dim as u32);
        self.u32(meta.vocab_dim);
        self.u64(meta.seed);
        self.f64(meta.alpha_doc);
        self.u32(match meta.encoder {
            EncoderMode::Precomputed => 0,
            EncoderMode::Toy => 1,
        });
        self.u64(meta.toy_seed);
        self.u64(count as u64);
    }

    pub fn hybrid_record(&mut self, doc: &DocRecord) {
        self.str(&doc.doc_id);
        self.str(&doc.meta.title);
        self.str(&doc.meta.abstract_text);
        self.f32s(doc.dense.as_slice());
        self.u32(doc.sparse.nnz() as u32);
        self.u32s(doc.sparse.indices());
        self.f32s(doc.sparse.values());
    }

    pub fn fused_record(&mut self, doc_id: &str, meta: &DocMeta, vector: &DenseVec) {
        self.str(doc_id);
        self.str(&meta.title);
        self.str(&meta.abstract_text);
        self.f32s(vector.as_slice());
    }
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        if self.remaining() < n {
            return Err(format!("truncated at byte {}", self.pos));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    pub fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub fn str(&mut self) -> std::result::Result<String, String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| format!("invalid UTF-8 before byte {}", self.pos))
    }
    pub fn f32s(&mut self, n: usize) -> std::result::Result<Vec<f32>, String> {
        Ok(self
            .take(n * 4)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
    pub fn u32s(&mut self, n: usize) -> std::result::Result<Vec<u32>, String> {
        Ok(self
            .take(n * 4)?
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    pub fn header(&mut self, kind: u32) -> std::result::Result<(IndexMeta, usize), String> {
        if self.take(8)? != MAGIC {
            return Err("not an index snapshot (bad magic)".into());
        }
        let version = self.u32()?;
        if version != VERSION {
            return Err(format!("unsupported snapshot version {version}"));
        }
        let found = self.u32()?;
        if found != kind {
            return Err(format!("snapshot kind {found}, expected {kind}"));
        }
        let dense_dim = self.u32()? as usize;
        let vocab_dim = self.u32()?;
        let seed = self.u64()?;
        let alpha_doc = self.f64()?;
        let encoder = match self.u32()? {
            0 => EncoderMode::Precomputed,
            1 => EncoderMode::Toy,
            other => return Err(format!("unknown encoder tag {other}")),
        };
        let toy_seed = self.u64()?;
        let count = self.u64()? as usize;
        Ok((
            IndexMeta {
                dense_dim,
                vocab_dim,
                seed,
                alpha_doc,
                encoder,
                toy_seed,
            },
            count,
        ))
    }

    pub fn hybrid_record(&mut self, meta: &IndexMeta) -> std::result::Result<DocRecord, String> {
        let doc_id = self.str()?;
        let title = self.str()?;
        let abstract_text = self.str()?;
        let dense = DenseVec::new(self.f32s(meta.dense_dim)?).map_err(|e| format!("{doc_id}: {e}"))?;
        let nnz = self.u32()? as usize;
        let indices = self.u32s(nnz)?;
        let values = self.f32s(nnz)?;
        let sparse = SparseVec::new(meta.vocab_dim, indices, values).map_err(|e| format!("{doc_id}: {e}"))?;
        Ok(DocRecord {
            doc_id,
            meta: DocMeta { title, abstract_text },
            dense,
            sparse,
            fused: None,
        })
    }

    pub fn fused_record(&mut self, meta: &IndexMeta) -> std::result::Result<FusedEntry, String> {
        let doc_id = self.str()?;
        let title = self.str()?;
        let abstract_text = self.str()?;
        let vector = DenseVec::new(self.f32s(meta.dense_dim)?).map_err(|e| format!("{doc_id}: {e}"))?;
        Ok(FusedEntry {
            doc_id,
            meta: DocMeta { title, abstract_text },
            vector,
        })
    }
}

pub fn encode_hybrid(meta: &IndexMeta, index: &HybridIndex) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(KIND_HYBRID, meta, index.len());
    for doc in index.records() {
        w.hybrid_record(&doc);
    }
    w.buf
}

pub fn encode_fused(meta: &IndexMeta, index: &FusedIndex) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(KIND_FUSED, meta, index.len());
    for e in index.entries() {
        w.fused_record(&e.doc_id, &e.meta, &e.vector);
    }
    w.buf
}

pub fn decode_hybrid(bytes: &[u8], origin: impl AsRef<Path>) -> Result<(IndexMeta, HybridIndex)> {
    let origin = origin.as_ref();
    let fail = |m: String| Error::format(origin, m);
    let mut r = Reader::new(bytes);
    let (meta, count) = r.header(KIND_HYBRID).map_err(fail)?;
    let mut index = HybridIndex::new(meta.dense_dim, meta.vocab_dim);
    let mut batch = Vec::with_capacity(LOAD_CHUNK);
    for _ in 0..count {
        batch.push(r.hybrid_record(&meta).map_err(fail)?);
        if batch.len() == LOAD_CHUNK {
            index.upsert(&batch)?;
            batch.clear();
        }
    }
    if !batch.is_empty() {
        index.upsert(&batch)?;
    }
    if r.remaining() != 0 {
        return Err(fail(format!("{} trailing bytes", r.remaining())));
    }
    Ok((meta, index))
}

pub fn decode_fused(bytes: &[u8], origin: impl AsRef<Path>) -> Result<(IndexMeta, FusedIndex)> {
    let origin = origin.as_ref();
    let fail = |m: String| Error::format(origin, m);
    let mut r = Reader::new(bytes);
    let (meta, count) = r.header(KIND_FUSED).map_err(fail)?;
    let mut index = FusedIndex::new(
        meta.dense_dim,
        FusedParams {
            seed: meta.seed,
            alpha_doc: meta.alpha_doc,
        },
    );
    let mut batch = Vec::with_capacity(LOAD_CHUNK);
    for _ in 0..count {
        batch.push(r.fused_record(&meta).map_err(fail)?);
        if batch.len() == LOAD_CHUNK {
            index.upsert(&batch)?;
            batch.clear();
        }
    }
    if !batch.is_empty() {
        index.upsert(&batch)?;
    }
    if r.remaining() != 0 {
        return Err(fail(format!("{} trailing bytes", r.remaining())));
    }
    Ok((meta, index))
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    std::fs::read(path).map_err(|e| Error::io(path, e))
}
