//! TREC-style effectiveness metrics at a rank cutoff.
//!
//! Conventions (matching trec_eval's `*_cut` measures):
//!
//! - A document is relevant when its grade is at least 1; unjudged documents
//!   count as grade 0.
//! - nDCG uses linear gain by default; the ideal DCG is built from every
//!   judged document of the query, not only the retrieved ones.
//! - MAP@k divides by `min(R, k)` where `R` is the number of relevant judged
//!   documents.
//! - Queries without any judgments are skipped, not scored as zero.

mod latency;

pub use latency::LatencyStats;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fusion::ild_at_k;
use crate::index::VectorSource;
use crate::types::{Hit, RankedList};

pub const DEFAULT_CUTOFF: usize = 10;

/// Relevance judgments: query → (document → grade).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    by_query: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query_id: &str, doc_id: &str, grade: u32) -> Result<()> {
        let docs = self.by_query.entry(String::from(query_id)).or_default();
        if docs.insert(String::from(doc_id), grade).is_some() {
            return Err(Error::DuplicateJudgment {
                query_id: String::from(query_id),
                doc_id: String::from(doc_id),
            });
        }
        Ok(())
    }

    pub fn for_query(&self, query_id: &str) -> Option<&BTreeMap<String, u32>> {
        self.by_query.get(query_id)
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> Option<u32> {
        self.by_query.get(query_id)?.get(doc_id).copied()
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.by_query.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_query.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_query.is_empty()
    }

    /// All judgments in `(query, doc, grade)` order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, u32)> {
        self.by_query
            .iter()
            .flat_map(|(q, docs)| docs.iter().map(move |(d, g)| (q.as_str(), d.as_str(), *g)))
    }
}

/// Gain function for nDCG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gain {
    /// `gain(r) = r` (trec_eval ndcg_cut).
    #[default]
    Linear,
    /// `gain(r) = 2^r - 1`.
    Exponential,
}

impl Gain {
    fn of(self, grade: u32) -> f64 {
        match self {
            Gain::Linear => f64::from(grade),
            Gain::Exponential => libm::exp2(f64::from(grade)) - 1.0,
        }
    }
}

fn grade_of(judged: &BTreeMap<String, u32>, doc_id: &str) -> u32 {
    judged.get(doc_id).copied().unwrap_or(0)
}

fn top(hits: &[Hit], k: usize) -> &[Hit] {
    &hits[..hits.len().min(k)]
}

fn discount(position: usize) -> f64 {
    // position is 0-based; rank i = position + 1 is discounted by log2(i + 1)
    libm::log2(position as f64 + 2.0)
}

pub fn ndcg_at_k(hits: &[Hit], judged: &BTreeMap<String, u32>, k: usize, gain: Gain) -> f64 {
    let dcg: f64 = top(hits, k)
        .iter()
        .enumerate()
        .map(|(i, h)| gain.of(grade_of(judged, &h.doc_id)) / discount(i))
        .sum();
    let mut ideal: Vec<u32> = judged.values().copied().filter(|&g| g > 0).collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| gain.of(g) / discount(i))
        .sum();
    if idcg > 0.0 {
        dcg / idcg
    } else {
        0.0
    }
}

pub fn precision_at_k(hits: &[Hit], judged: &BTreeMap<String, u32>, k: usize) -> f64 {
    let relevant = top(hits, k)
        .iter()
        .filter(|h| grade_of(judged, &h.doc_id) >= 1)
        .count();
    relevant as f64 / k as f64
}

pub fn mrr_at_k(hits: &[Hit], judged: &BTreeMap<String, u32>, k: usize) -> f64 {
    top(hits, k)
        .iter()
        .position(|h| grade_of(judged, &h.doc_id) >= 1)
        .map_or(0.0, |i| 1.0 / (i as f64 + 1.0))
}

pub fn map_at_k(hits: &[Hit], judged: &BTreeMap<String, u32>, k: usize) -> f64 {
    let total_relevant = judged.values().filter(|&&g| g >= 1).count();
    if total_relevant == 0 {
        return 0.0;
    }
    let mut found = 0usize;
    let mut sum = 0.0;
    for (i, h) in top(hits, k).iter().enumerate() {
        if grade_of(judged, &h.doc_id) >= 1 {
            found += 1;
            sum += found as f64 / (i as f64 + 1.0);
        }
    }
    sum / total_relevant.min(k) as f64
}

pub fn hitrate_at_k(hits: &[Hit], judged: &BTreeMap<String, u32>, k: usize) -> f64 {
    if top(hits, k).iter().any(|h| grade_of(judged, &h.doc_id) >= 1) {
        1.0
    } else {
        0.0
    }
}

/// A TREC run: one ranked list per query under a run tag.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFile {
    pub tag: String,
    pub lists: BTreeMap<String, RankedList>,
}

impl RunFile {
    pub fn new(tag: impl Into<String>) -> Self {
        Self {
            tag: tag.into(),
            lists: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, list: RankedList) {
        self.lists.insert(list.query_id.clone(), list);
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricValues {
    pub ndcg: f64,
    pub precision: f64,
    pub mrr: f64,
    pub map: f64,
    pub hit_rate: f64,
    pub ild: f64,
}

impl MetricValues {
    pub fn as_array(&self) -> [f64; 6] {
        [self.ndcg, self.precision, self.mrr, self.map, self.hit_rate, self.ild]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryMetrics {
    pub query_id: String,
    pub values: MetricValues,
    /// ILD had fewer than two result vectors to work with.
    pub ild_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub run_tag: String,
    pub cutoff: usize,
    pub per_query: Vec<QueryMetrics>,
    pub mean: MetricValues,
    /// Queries in the run without judgments; excluded from the means.
    pub skipped: Vec<String>,
}

impl MetricReport {
    pub fn evaluated(&self) -> usize {
        self.per_query.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub cutoff: usize,
    pub gain: Gain,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            gain: Gain::Linear,
        }
    }
}

/// Scores every judged query of `run`. ILD uses the vectors `vectors`
/// returns for each result; results without a vector are left out of ILD.
pub fn evaluate_run<V: VectorSource>(
    run: &RunFile,
    qrels: &Qrels,
    vectors: &V,
    options: EvalOptions,
) -> Result<MetricReport> {
    if run.is_empty() {
        return Err(Error::Empty("run"));
    }
    if options.cutoff == 0 {
        return Err(Error::param("metric cutoff must be at least 1"));
    }
    let k = options.cutoff;
    let mut per_query = Vec::new();
    let mut skipped = Vec::new();
    for (query_id, list) in &run.lists {
        let Some(judged) = qrels.for_query(query_id) else {
            skipped.push(query_id.clone());
            continue;
        };
        let hits = &list.hits;
        let result_vecs: Vec<_> = top(hits, k)
            .iter()
            .filter_map(|h| vectors.vector(&h.doc_id))
            .collect();
        let ild = ild_at_k(&result_vecs, k)?;
        per_query.push(QueryMetrics {
            query_id: query_id.clone(),
            values: MetricValues {
                ndcg: ndcg_at_k(hits, judged, k, options.gain),
                precision: precision_at_k(hits, judged, k),
                mrr: mrr_at_k(hits, judged, k),
                map: map_at_k(hits, judged, k),
                hit_rate: hitrate_at_k(hits, judged, k),
                ild: ild.value,
            },
            ild_degenerate: ild.degenerate,
        });
    }
    if per_query.is_empty() {
        return Err(Error::NoEvaluableQueries);
    }
    let n = per_query.len() as f64;
    let mut sums = [0.0f64; 6];
    for q in &per_query {
        for (s, v) in sums.iter_mut().zip(q.values.as_array()) {
            *s += v;
        }
    }
    let mean = MetricValues {
        ndcg: sums[0] / n,
        precision: sums[1] / n,
        mrr: sums[2] / n,
        map: sums[3] / n,
        hit_rate: sums[4] / n,
        ild: sums[5] / n,
    };
    Ok(MetricReport {
        run_tag: run.tag.clone(),
        cutoff: k,
        per_query,
        mean,
        skipped,
    })
}
