//! Checkpointed corpus ingestion.
//!
//! The corpus is cut into batches of `batch_size` input lines. For each batch
//! the valid documents are upserted into both indices, appended to an
//! append-only segment log, and then the checkpoint is rewritten atomically.
//! A rerun with the same output directory truncates the log to the length the
//! checkpoint recorded, replays it, and continues with the next batch, so an
//! interrupted ingest ends with the same snapshots as an uninterrupted one.
//!
//! Output directory layout:
//!
//! ```text
//! checkpoint.json   progress, corpus digest and build parameters
//! segments.log      accepted documents with their fused vectors, batch after batch
//! hybrid.snap       final hybrid index snapshot
//! fused.snap        final fused index snapshot
//! ```

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use hybridsearch_core::index::{FusedEntry, FusedIndex, FusedParams, HybridIndex};
use hybridsearch_core::projection::{fuse_document, AlphaMix, ProjectionMatrix, DEFAULT_SEED};
use hybridsearch_core::toy::{ToyEncoder, DEFAULT_TOY_SEED};
use hybridsearch_core::{DocMeta, DocRecord, DENSE_DIM, VOCAB_DIM};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::jsonl::CorpusLine;
use crate::formats::snapshot::{self, digest, EncoderMode, IndexMeta, Reader, Writer};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const SEGMENT_FILE: &str = "segments.log";
pub const HYBRID_FILE: &str = "hybrid.snap";
pub const FUSED_FILE: &str = "fused.snap";
pub const DEFAULT_BATCH_SIZE: usize = 100;
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub batch_size: usize,
    pub meta: IndexMeta,
    /// Stop after this batch completes, as if the process had been killed.
    pub stop_after_batch: Option<usize>,
    /// Discard any previous progress in the output directory.
    pub fresh: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            batch_size: DEFAULT_BATCH_SIZE,
            meta: IndexMeta {
                dense_dim: DENSE_DIM,
                vocab_dim: VOCAB_DIM,
                seed: DEFAULT_SEED,
                alpha_doc: AlphaMix::DEFAULT_DOC,
                encoder: EncoderMode::Precomputed,
                toy_seed: DEFAULT_TOY_SEED,
            },
            stop_after_batch: None,
            fresh: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    /// 1-based line in the corpus file.
    pub line: usize,
    pub doc_id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub batch_size: usize,
    pub corpus_digest: String,
    pub meta: IndexMeta,
    pub last_completed_batch: usize,
    pub total_batches: usize,
    /// Length of the segment log covered by the completed batches.
    pub segment_bytes: u64,
    pub stored: usize,
    pub skipped: Vec<Skipped>,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub total_batches: usize,
    pub last_completed_batch: usize,
    pub stored: usize,
    pub skipped: Vec<Skipped>,
    /// First batch processed by this run when it picked up earlier progress.
    pub resumed_from: Option<usize>,
    pub finished: bool,
    pub hybrid_digest: Option<String>,
    pub fused_digest: Option<String>,
}

pub struct Built {
    pub hybrid: HybridIndex,
    pub fused: FusedIndex,
}

impl Built {
    pub fn new(meta: &IndexMeta) -> Self {
        Self {
            hybrid: HybridIndex::new(meta.dense_dim, meta.vocab_dim),
            fused: FusedIndex::new(
                meta.dense_dim,
                FusedParams {
                    seed: meta.seed,
                    alpha_doc: meta.alpha_doc,
                },
            ),
        }
    }

    /// Upserts documents whose fused vectors are already computed.
    pub fn apply(&mut self, docs: &[DocRecord]) -> Result<()> {
        if docs.is_empty() {
            return Ok(());
        }
        let entries: Vec<FusedEntry> = docs
            .iter()
            .map(|d| FusedEntry {
                doc_id: d.doc_id.clone(),
                meta: d.meta.clone(),
                vector: d.fused.clone().expect("fused vector computed before apply"),
            })
            .collect();
        self.hybrid.upsert(docs)?;
        self.fused.upsert(&entries)?;
        Ok(())
    }
}

/// Turns one corpus line into a document ready for both indices, or the
/// reason it has to be skipped.
pub struct DocBuilder<'a> {
    pub meta: &'a IndexMeta,
    pub projection: &'a ProjectionMatrix,
    pub encoder: Option<&'a ToyEncoder>,
}

impl DocBuilder<'_> {
    pub fn build(&self, line: CorpusLine) -> std::result::Result<DocRecord, String> {
        if line.id.trim().is_empty() {
            return Err("empty id".into());
        }
        let text = line.text();
        let (dense, sparse) = match line.vectors(self.meta.dense_dim, self.meta.vocab_dim)? {
            Some(v) => v,
            None if text.is_empty() => return Err("empty record: no title, abstract or vectors".into()),
            None => match self.encoder {
                Some(enc) => enc.encode(&text).map_err(|e| e.to_string())?,
                None => return Err("no vectors and no encoder configured".into()),
            },
        };
        if !dense.is_unit() {
            return Err(format!("dense vector is not unit-norm (norm {})", dense.norm()));
        }
        let mut doc = DocRecord {
            doc_id: line.id,
            meta: DocMeta {
                title: line.title,
                abstract_text: line.abstract_text,
            },
            dense,
            sparse,
            fused: None,
        };
        let alpha = AlphaMix::document(self.meta.alpha_doc).map_err(|e| e.to_string())?;
        let fused = fuse_document(&doc, self.projection, alpha).map_err(|e| match e {
            hybridsearch_core::Error::InvalidDocument { reason, .. } => reason,
            other => other.to_string(),
        })?;
        doc.fused = Some(fused);
        Ok(doc)
    }
}

pub fn toy_encoder(meta: &IndexMeta) -> Result<Option<ToyEncoder>> {
    Ok(match meta.encoder {
        EncoderMode::Toy => Some(ToyEncoder::new(meta.dense_dim, meta.vocab_dim, meta.toy_seed)?),
        EncoderMode::Precomputed => None,
    })
}

fn paths(dir: &Path) -> (PathBuf, PathBuf) {
    (dir.join(CHECKPOINT_FILE), dir.join(SEGMENT_FILE))
}

pub fn read_checkpoint(dir: &Path) -> Result<Option<Checkpoint>> {
    let path = dir.join(CHECKPOINT_FILE);
    match std::fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| Error::format(&path, e.to_string())),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(&path, e)),
    }
}

fn write_checkpoint(dir: &Path, cp: &Checkpoint) -> Result<()> {
    let text = serde_json::to_string_pretty(cp).map_err(|e| Error::Checkpoint(e.to_string()))?;
    snapshot::write_atomic(dir.join(CHECKPOINT_FILE), text.as_bytes())
}

fn remove_if_exists(path: &Path) -> Result<()> {
    match std::fs::remove_file(path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn encode_segment(docs: &[DocRecord]) -> Vec<u8> {
    let mut w = Writer::default();
    for d in docs {
        w.hybrid_record(d);
        w.f32s(d.fused.as_ref().expect("fused vector computed").as_slice());
    }
    w.buf
}

fn replay_segments(path: &Path, bytes: &[u8], meta: &IndexMeta, built: &mut Built) -> Result<()> {
    let mut r = Reader::new(bytes);
    let mut batch = Vec::new();
    while r.remaining() > 0 {
        let mut doc = r.hybrid_record(meta).map_err(|m| Error::format(path, m))?;
        let v = r.f32s(meta.dense_dim).map_err(|m| Error::format(path, m))?;
        doc.fused = Some(hybridsearch_core::DenseVec::new(v)?);
        batch.push(doc);
        if batch.len() == 1000 {
            built.apply(&batch)?;
            batch.clear();
        }
    }
    built.apply(&batch)
}

fn summary(cp: &Checkpoint, resumed_from: Option<usize>, digests: Option<(String, String)>) -> IngestSummary {
    let (h, f) = digests.unzip();
    IngestSummary {
        total_batches: cp.total_batches,
        last_completed_batch: cp.last_completed_batch,
        stored: cp.stored,
        skipped: cp.skipped.clone(),
        resumed_from,
        finished: cp.finished,
        hybrid_digest: h,
        fused_digest: f,
    }
}

/// Ingests `corpus` into `out_dir`, resuming earlier progress when the
/// directory holds a checkpoint for the same corpus and parameters.
pub fn ingest(corpus: &Path, out_dir: &Path, opts: &IngestOptions) -> Result<IngestSummary> {
    if opts.batch_size == 0 {
        return Err(Error::Invalid("batch size must be at least 1".into()));
    }
    AlphaMix::document(opts.meta.alpha_doc)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let bytes = std::fs::read(corpus).map_err(|e| Error::io(corpus, e))?;
    let corpus_digest = digest(&bytes);
    let text = std::str::from_utf8(&bytes).map_err(|_| Error::format(corpus, "corpus is not UTF-8"))?;
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    let total_batches = lines.len().div_ceil(opts.batch_size);

    let (cp_path, seg_path) = paths(out_dir);
    if opts.fresh {
        for p in [&cp_path, &seg_path, &out_dir.join(HYBRID_FILE), &out_dir.join(FUSED_FILE)] {
            remove_if_exists(p)?;
        }
    }

    let meta = opts.meta;
    let mut built = Built::new(&meta);
    let mut resumed_from = None;
    let mut cp = match read_checkpoint(out_dir)? {
        Some(cp) => {
            if cp.corpus_digest != corpus_digest {
                return Err(Error::Checkpoint(format!(
                    "corpus digest {} does not match the checkpoint's {}; rerun with --fresh to start over",
                    corpus_digest, cp.corpus_digest
                )));
            }
            if cp.batch_size != opts.batch_size || cp.meta != meta || cp.version != CHECKPOINT_VERSION {
                return Err(Error::Checkpoint(
                    "build parameters differ from the checkpoint; rerun with --fresh to start over".into(),
                ));
            }
            if cp.finished {
                let h = snapshot::read_file(out_dir.join(HYBRID_FILE))?;
                let f = snapshot::read_file(out_dir.join(FUSED_FILE))?;
                return Ok(summary(&cp, None, Some((digest(&h), digest(&f)))));
            }
            let log = std::fs::read(&seg_path).map_err(|e| Error::io(&seg_path, e))?;
            if (log.len() as u64) < cp.segment_bytes {
                return Err(Error::Checkpoint(format!(
                    "segment log is shorter ({} bytes) than the checkpoint records ({})",
                    log.len(),
                    cp.segment_bytes
                )));
            }
            let covered = &log[..cp.segment_bytes as usize];
            replay_segments(&seg_path, covered, &meta, &mut built)?;
            let file = OpenOptions::new()
                .write(true)
                .open(&seg_path)
                .map_err(|e| Error::io(&seg_path, e))?;
            file.set_len(cp.segment_bytes).map_err(|e| Error::io(&seg_path, e))?;
            resumed_from = Some(cp.last_completed_batch + 1);
            cp
        }
        None => {
            remove_if_exists(&seg_path)?;
            Checkpoint {
                version: CHECKPOINT_VERSION,
                batch_size: opts.batch_size,
                corpus_digest,
                meta,
                last_completed_batch: 0,
                total_batches,
                segment_bytes: 0,
                stored: 0,
                skipped: Vec::new(),
                finished: false,
            }
        }
    };

    let projection = ProjectionMatrix::build(meta.seed, meta.dense_dim, meta.vocab_dim)?;
    let encoder = toy_encoder(&meta)?;
    let builder = DocBuilder {
        meta: &meta,
        projection: &projection,
        encoder: encoder.as_ref(),
    };
    let mut log = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&seg_path)
        .map_err(|e| Error::io(&seg_path, e))?;

    for batch_no in cp.last_completed_batch + 1..=total_batches {
        let start = (batch_no - 1) * opts.batch_size;
        let end = (start + opts.batch_size).min(lines.len());
        let mut accepted: Vec<DocRecord> = Vec::new();
        for &(line_no, line) in &lines[start..end] {
            let parsed: CorpusLine = match serde_json::from_str(line) {
                Ok(p) => p,
                Err(e) => {
                    cp.skipped.push(Skipped {
                        line: line_no,
                        doc_id: None,
                        reason: format!("malformed record: {e}"),
                    });
                    continue;
                }
            };
            let id = parsed.id.clone();
            if built.hybrid.contains(&id) || accepted.iter().any(|d| d.doc_id == id) {
                cp.skipped.push(Skipped {
                    line: line_no,
                    doc_id: Some(id),
                    reason: "duplicate doc_id".into(),
                });
                continue;
            }
            match builder.build(parsed) {
                Ok(doc) => accepted.push(doc),
                Err(reason) => cp.skipped.push(Skipped {
                    line: line_no,
                    doc_id: Some(id).filter(|s| !s.is_empty()),
                    reason,
                }),
            }
        }
        built.apply(&accepted)?;
        let seg = encode_segment(&accepted);
        log.write_all(&seg).map_err(|e| Error::io(&seg_path, e))?;
        log.sync_data().map_err(|e| Error::io(&seg_path, e))?;
        cp.segment_bytes += seg.len() as u64;
        cp.stored += accepted.len();
        cp.last_completed_batch = batch_no;
        write_checkpoint(out_dir, &cp)?;
        tracing::debug!(batch = batch_no, total_batches, stored = cp.stored, "batch complete");
        if opts.stop_after_batch == Some(batch_no) {
            return Ok(summary(&cp, resumed_from, None));
        }
    }

    let h = snapshot::encode_hybrid(&meta, &built.hybrid);
    let f = snapshot::encode_fused(&meta, &built.fused);
    snapshot::write_atomic(out_dir.join(HYBRID_FILE), &h)?;
    snapshot::write_atomic(out_dir.join(FUSED_FILE), &f)?;
    cp.finished = true;
    write_checkpoint(out_dir, &cp)?;
    Ok(summary(&cp, resumed_from, Some((digest(&h), digest(&f)))))
}

/// Builds both indices in memory from ready documents (no checkpointing).
pub fn build_in_memory(
    lines: impl IntoIterator<Item = CorpusLine>,
    meta: &IndexMeta,
    projection: &ProjectionMatrix,
) -> Result<(Built, Vec<Skipped>)> {
    let encoder = toy_encoder(meta)?;
    let builder = DocBuilder {
        meta,
        projection,
        encoder: encoder.as_ref(),
    };
    let mut built = Built::new(meta);
    let mut skipped = Vec::new();
    let mut batch = Vec::new();
    for (i, line) in lines.into_iter().enumerate() {
        let id = line.id.clone();
        if built.hybrid.contains(&id) || batch.iter().any(|d: &DocRecord| d.doc_id == id) {
            skipped.push(Skipped {
                line: i + 1,
                doc_id: Some(id),
                reason: "duplicate doc_id".into(),
            });
            continue;
        }
        match builder.build(line) {
            Ok(doc) => batch.push(doc),
            Err(reason) => skipped.push(Skipped {
                line: i + 1,
                doc_id: Some(id),
                reason,
            }),
        }
        if batch.len() == DEFAULT_BATCH_SIZE {
            built.apply(&batch)?;
            batch.clear();
        }
    }
    built.apply(&batch)?;
    Ok((built, skipped))
}
