//! Query execution with timing: single queries, batches, the alpha_query
//! sweep and the latency benchmark.

use std::time::Instant;

use hybridsearch_core::metrics::{evaluate_run, EvalOptions, LatencyStats, MetricReport, Qrels, RunFile};
use hybridsearch_core::pipeline::{Engine, Method, PipelineConfig, QueryVectors};
use hybridsearch_core::projection::AlphaMix;
use hybridsearch_core::toy::ToyEncoder;
use hybridsearch_core::{DenseVec, RankedList, SparseVec};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formats::jsonl::QueryRecord;

/// Stage timings of one query in milliseconds. `total_ms` is measured
/// around the whole query, so it is at least the sum of the stages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timing {
    pub encode_ms: f64,
    pub retrieve_ms: f64,
    pub fuse_ms: f64,
    pub total_ms: f64,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

#[derive(Clone, Copy)]
pub struct Searcher<'a> {
    pub engine: Engine<'a>,
    pub encoder: Option<&'a ToyEncoder>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encode {
    /// Use supplied vectors, encoding text only for missing ones.
    IfMissing,
    /// Encode the text even when vectors are supplied.
    Always,
}

impl<'a> Searcher<'a> {
    /// Total queries served by both indices.
    pub fn index_queries(&self) -> u64 {
        self.engine.hybrid.query_count() + self.engine.fused.query_count()
    }

    fn prepare(
        &self,
        cfg: &PipelineConfig,
        q: &QueryRecord,
        mode: Encode,
    ) -> Result<(Option<DenseVec>, Option<SparseVec>, bool)> {
        let (need_dense, need_sparse) = cfg.required_vectors();
        let missing = (need_dense && q.dense.is_none()) || (need_sparse && q.sparse.is_none());
        let encode = mode == Encode::Always || missing;
        match (encode, self.encoder) {
            (true, Some(enc)) if !q.text.trim().is_empty() => {
                let (d, s) = enc.encode(&q.text)?;
                let keep = mode == Encode::IfMissing;
                Ok((
                    q.dense.clone().filter(|_| keep).or(Some(d)),
                    q.sparse.clone().filter(|_| keep).or(Some(s)),
                    true,
                ))
            }
            (true, None) if mode == Encode::Always => {
                Err(Error::Invalid("no in-process encoder configured for this index".into()))
            }
            _ => Ok((q.dense.clone(), q.sparse.clone(), false)),
        }
    }

    pub fn run_query(&self, cfg: &PipelineConfig, q: &QueryRecord) -> Result<(RankedList, Timing)> {
        self.run_query_with(cfg, q, Encode::IfMissing)
    }

    pub fn run_query_with(&self, cfg: &PipelineConfig, q: &QueryRecord, mode: Encode) -> Result<(RankedList, Timing)> {
        let start = Instant::now();
        let (dense, sparse, encoded) = self.prepare(cfg, q, mode)?;
        let encode_ms = if encoded { ms(start) } else { 0.0 };
        let t = Instant::now();
        let vectors = QueryVectors {
            dense: dense.as_ref(),
            sparse: sparse.as_ref(),
        };
        let retrieved = self.engine.retrieve(cfg, &q.query_id, vectors)?;
        let retrieve_ms = ms(t);
        let t = Instant::now();
        let list = self.engine.finish(cfg, retrieved)?;
        let fuse_ms = ms(t);
        Ok((
            list,
            Timing {
                encode_ms,
                retrieve_ms,
                fuse_ms,
                total_ms: ms(start),
            },
        ))
    }

    pub fn run_batch(&self, cfg: &PipelineConfig, queries: &[QueryRecord]) -> Result<BatchOutput> {
        if queries.is_empty() {
            return Err(Error::Invalid("no queries to run".into()));
        }
        cfg.validate()?;
        let mut run = RunFile::new(cfg.method.name());
        let mut timings = Vec::new();
        let mut failures = Vec::new();
        for q in queries {
            match self.run_query(cfg, q) {
                Ok((list, timing)) => {
                    run.insert(list);
                    timings.push((q.query_id.clone(), timing));
                }
                Err(e) => failures.push(QueryFailure {
                    query_id: q.query_id.clone(),
                    error: e.to_string(),
                }),
            }
        }
        let latency = if timings.is_empty() {
            None
        } else {
            Some(LatencyStats::from_samples(timings.iter().map(|t| t.1.total_ms).collect())?)
        };
        Ok(BatchOutput {
            run,
            latency,
            timings,
            failures,
        })
    }

    /// Runs the batch and scores it; ILD uses the hybrid index's dense vectors.
    pub fn evaluate(
        &self,
        cfg: &PipelineConfig,
        queries: &[QueryRecord],
        qrels: &Qrels,
        options: EvalOptions,
    ) -> Result<(BatchOutput, MetricReport)> {
        let batch = self.run_batch(cfg, queries)?;
        if batch.run.is_empty() {
            return Err(Error::Invalid(format!(
                "every query failed; first error: {}",
                batch.failures[0].error
            )));
        }
        let report = evaluate_run(&batch.run, qrels, self.engine.hybrid, options)?;
        Ok((batch, report))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryFailure {
    pub query_id: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct BatchOutput {
    pub run: RunFile,
    /// `None` when every query failed.
    pub latency: Option<LatencyStats>,
    pub timings: Vec<(String, Timing)>,
    pub failures: Vec<QueryFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha_query: f64,
    pub ndcg: f64,
    pub precision: f64,
    pub ild: f64,
    pub evaluated: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub method: String,
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

/// Re-runs a projection-fusion method once per alpha_query against the
/// already built fused index; only the query side changes.
pub fn alpha_sweep(
    searcher: &Searcher<'_>,
    base: &PipelineConfig,
    alphas: &[f64],
    queries: &[QueryRecord],
    qrels: &Qrels,
    options: EvalOptions,
) -> Result<Sweep> {
    if alphas.is_empty() {
        return Err(Error::Invalid("no alpha values to sweep".into()));
    }
    if !matches!(base.method, Method::B5 | Method::B5Mmr) {
        return Err(Error::Invalid(format!(
            "alpha_query only affects b5 and b5_mmr, not {}",
            base.method
        )));
    }
    let mut warnings = Vec::new();
    let mut unique: Vec<f64> = Vec::new();
    for &a in alphas {
        AlphaMix::query(a)?;
        if unique.contains(&a) {
            warnings.push(format!("duplicate alpha_query {a} ignored"));
        } else {
            unique.push(a);
        }
    }
    let mut rows = Vec::new();
    for alpha in unique {
        let mut cfg = base.clone();
        cfg.alpha_query = AlphaMix::query(alpha)?;
        let (batch, report) = searcher.evaluate(&cfg, queries, qrels, options)?;
        rows.push(SweepRow {
            alpha_query: alpha,
            ndcg: report.mean.ndcg,
            precision: report.mean.precision,
            ild: report.mean.ild,
            evaluated: report.evaluated(),
            failures: batch.failures.len(),
        });
    }
    Ok(Sweep {
        method: base.method.name().to_string(),
        rows,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub methods: Vec<Method>,
    /// Untimed passes over the first queries before measuring.
    pub warmup: usize,
    /// Timed passes over the whole query set.
    pub rounds: usize,
    /// Also time in-process encoding of the query text.
    pub with_encoding: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            methods: vec![Method::Rrf, Method::B5],
            warmup: 5,
            rounds: 1,
            with_encoding: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: String,
    pub label: String,
    /// Retrieval through fusion, vectors prepared.
    pub avg_ms: f64,
    pub p95_ms: f64,
    /// Including in-process query encoding, when measured.
    pub encoded_avg_ms: Option<f64>,
    pub encoded_p95_ms: Option<f64>,
    pub index_queries_per_search: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bench {
    pub queries: usize,
    pub rounds: usize,
    pub rows: Vec<BenchRow>,
}

/// Latency comparison of pipelines over the same queries. Methods are
/// interleaved per query, rotating the order, so drift affects all alike.
pub fn bench(searcher: &Searcher<'_>, base: &PipelineConfig, queries: &[QueryRecord], opts: &BenchOptions) -> Result<Bench> {
    if queries.is_empty() {
        return Err(Error::Invalid("no queries to benchmark".into()));
    }
    if opts.methods.is_empty() || opts.rounds == 0 {
        return Err(Error::Invalid("bench needs at least one method and one round".into()));
    }
    if opts.with_encoding && searcher.encoder.is_none() {
        return Err(Error::Invalid("encoding latency needs an index built with the toy encoder".into()));
    }
    let cfgs: Vec<PipelineConfig> = opts
        .methods
        .iter()
        .map(|&m| {
            let mut c = base.clone();
            c.method = m;
            c.validate().map(|_| c)
        })
        .collect::<std::result::Result<_, _>>()?;

    for q in queries.iter().take(opts.warmup) {
        for cfg in &cfgs {
            searcher.run_query(cfg, q)?;
        }
    }

    let n = cfgs.len();
    let mut plain: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut encoded: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut index_queries = vec![0u64; n];
    let mut step = 0usize;
    for _ in 0..opts.rounds {
        for q in queries {
            for j in 0..n {
                let i = (j + step) % n;
                let before = searcher.index_queries();
                let (_, t) = searcher.run_query(&cfgs[i], q)?;
                index_queries[i] += searcher.index_queries() - before;
                plain[i].push(t.total_ms);
                if opts.with_encoding {
                    let (_, t) = searcher.run_query_with(&cfgs[i], q, Encode::Always)?;
                    encoded[i].push(t.total_ms);
                }
            }
            step += 1;
        }
    }

    let mut rows = Vec::new();
    for (i, cfg) in cfgs.iter().enumerate() {
        let stats = LatencyStats::from_samples(std::mem::take(&mut plain[i]))?;
        let enc = if opts.with_encoding {
            Some(LatencyStats::from_samples(std::mem::take(&mut encoded[i]))?)
        } else {
            None
        };
        rows.push(BenchRow {
            method: cfg.method.name().to_string(),
            label: cfg.method.label().to_string(),
            avg_ms: stats.avg,
            p95_ms: stats.p95,
            encoded_avg_ms: enc.as_ref().map(|e| e.avg),
            encoded_p95_ms: enc.as_ref().map(|e| e.p95),
            index_queries_per_search: index_queries[i] as f64 / stats.samples.len() as f64,
            samples: stats.samples.len(),
        });
    }
    Ok(Bench {
        queries: queries.len(),
        rounds: opts.rounds,
        rows,
    })
}
