//! Line-delimited JSON corpus and query files.
//!
//! Corpus, one document per line:
//!
//! ```json
//! {"id": "d1", "title": "...", "abstract": "...",
//!  "dense": [0.01, ...], "sparse": {"indices": [3, 17], "values": [0.4, 1.2]}}
//! ```
//!
//! Queries, one per line: `{"query_id": "q1", "text": "...", "dense": [...], "sparse": {...}}`.
//! Vectors are optional in both; without them a toy encoder must be configured.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use hybridsearch_core::{DenseVec, SparseVec};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseJson {
    pub indices: Vec<u32>,
    pub values: Vec<f32>,
}

impl SparseJson {
    pub fn parse(self, vocab_dim: u32) -> std::result::Result<SparseVec, String> {
        SparseVec::new(vocab_dim, self.indices, self.values).map_err(|e| e.to_string())
    }
}

impl From<&SparseVec> for SparseJson {
    fn from(s: &SparseVec) -> Self {
        Self {
            indices: s.indices().to_vec(),
            values: s.values().to_vec(),
        }
    }
}

fn parse_dense(values: Vec<f32>, dim: usize) -> std::result::Result<DenseVec, String> {
    if values.len() != dim {
        return Err(format!("dense vector has {} values, expected {dim}", values.len()));
    }
    DenseVec::new(values).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusLine {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<f32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparse: Option<SparseJson>,
}

impl CorpusLine {
    /// Title and abstract joined the way documents are encoded.
    pub fn text(&self) -> String {
        match (self.title.trim(), self.abstract_text.trim()) {
            (t, "") => t.to_string(),
            ("", a) => a.to_string(),
            (t, a) => format!("{t} {a}"),
        }
    }

    /// Both vectors when both are present; `None` when neither is.
    pub fn vectors(&self, dense_dim: usize, vocab_dim: u32) -> std::result::Result<Option<(DenseVec, SparseVec)>, String> {
        match (&self.dense, &self.sparse) {
            (None, None) => Ok(None),
            (Some(d), Some(s)) => Ok(Some((
                parse_dense(d.clone(), dense_dim)?,
                s.clone().parse(vocab_dim)?,
            ))),
            (Some(_), None) => Err("dense vector without a sparse vector".into()),
            (None, Some(_)) => Err("sparse vector without a dense vector".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryLine {
    pub query_id: String,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<f32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparse: Option<SparseJson>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub query_id: String,
    pub text: String,
    pub dense: Option<DenseVec>,
    pub sparse: Option<SparseVec>,
}

impl QueryLine {
    pub fn into_record(self, dense_dim: usize, vocab_dim: u32) -> std::result::Result<QueryRecord, String> {
        if self.query_id.is_empty() {
            return Err("empty query_id".into());
        }
        Ok(QueryRecord {
            dense: self.dense.map(|d| parse_dense(d, dense_dim)).transpose()?,
            sparse: self.sparse.map(|s| s.parse(vocab_dim)).transpose()?,
            query_id: self.query_id,
            text: self.text,
        })
    }
}

impl From<&QueryRecord> for QueryLine {
    fn from(q: &QueryRecord) -> Self {
        Self {
            query_id: q.query_id.clone(),
            text: q.text.clone(),
            dense: q.dense.as_ref().map(|d| d.as_slice().to_vec()),
            sparse: q.sparse.as_ref().map(SparseJson::from),
        }
    }
}

/// Reads every non-blank line of a JSONL file, failing on the first bad one.
pub fn read_lines<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(path, n + 1, e.to_string()))?);
    }
    Ok(out)
}

pub fn read_queries(path: impl AsRef<Path>, dense_dim: usize, vocab_dim: u32) -> Result<Vec<QueryRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: QueryLine = serde_json::from_str(&line).map_err(|e| Error::parse(path, n + 1, e.to_string()))?;
        let record = parsed
            .into_record(dense_dim, vocab_dim)
            .map_err(|e| Error::parse(path, n + 1, e))?;
        if !seen.insert(record.query_id.clone()) {
            return Err(Error::parse(path, n + 1, format!("duplicate query_id {}", record.query_id)));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn write_lines<T: Serialize>(path: impl AsRef<Path>, items: impl IntoIterator<Item = T>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| Error::format(path, e.to_string()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
