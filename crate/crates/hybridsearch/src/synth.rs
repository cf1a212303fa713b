//! Clustered synthetic corpora.
//!
//! Every query owns a topic. A topic's documents come in facets: small groups
//! of near-duplicates that share a dense direction and a set of facet terms.
//! Facets sit at different distances from the topic centre, so plain
//! relevance ranking fills the top of a list with one or two facets while
//! the candidate pool holds several. Sparse vectors mix topic terms, facet
//! terms and Zipf-distributed background terms.

use std::path::Path;

use hybridsearch_core::metrics::Qrels;
use hybridsearch_core::{l2_normalize, DenseVec, SparseVec, DENSE_DIM, VOCAB_DIM};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Zipf};

use crate::error::{Error, Result};
use crate::formats::jsonl::{write_lines, CorpusLine, QueryLine, QueryRecord, SparseJson};
use crate::formats::trec;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub docs: usize,
    /// One topic per query.
    pub queries: usize,
    pub dense_dim: usize,
    pub vocab_dim: u32,
    pub seed: u64,
    /// Near-duplicates per facet.
    pub facet_size: usize,
    pub topic_terms: usize,
    pub facet_terms: usize,
    /// Zipf-distributed background terms per document.
    pub background_terms: usize,
    /// Background terms per query.
    pub query_background_terms: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            docs: 1000,
            queries: 50,
            dense_dim: DENSE_DIM,
            vocab_dim: VOCAB_DIM,
            seed: 7,
            facet_size: 8,
            topic_terms: 24,
            facet_terms: 12,
            background_terms: 120,
            query_background_terms: 24,
        }
    }
}

pub struct SynthCorpus {
    pub docs: Vec<CorpusLine>,
    pub queries: Vec<QueryRecord>,
    pub qrels: Qrels,
}

fn gaussian_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn unit_f32(v: &[f64]) -> Result<DenseVec> {
    let d = DenseVec::new(v.iter().map(|&x| x as f32).collect())?;
    Ok(l2_normalize(&d)?)
}

fn sparse(vocab_dim: u32, weights: std::collections::BTreeMap<u32, f32>) -> Result<SparseVec> {
    Ok(SparseVec::from_pairs(vocab_dim, weights.into_iter().collect())?)
}

struct Facet {
    direction: Vec<f64>,
    offset: f64,
    terms: Vec<u32>,
}

struct Topic {
    centre: Vec<f64>,
    terms: Vec<u32>,
    facets: Vec<Facet>,
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    if cfg.queries == 0 || cfg.docs < cfg.queries || cfg.facet_size == 0 {
        return Err(Error::Invalid(
            "synthetic corpus needs at least one query, one document per query and facet_size >= 1".into(),
        ));
    }
    if u64::from(cfg.vocab_dim) < 16 || cfg.dense_dim < 2 {
        return Err(Error::Invalid("synthetic corpus needs dense_dim >= 2 and vocab_dim >= 16".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = cfg.vocab_dim;
    // Topic and facet terms come from a shuffled vocabulary; when it runs out
    // terms are reused, which only blurs the clusters a little.
    let mut term_pool: Vec<u32> = (0..vocab).collect();
    term_pool.shuffle(&mut rng);
    let mut next_term = 0usize;
    let mut take_terms = |n: usize| -> Vec<u32> {
        (0..n)
            .map(|_| {
                let t = term_pool[next_term % term_pool.len()];
                next_term += 1;
                t
            })
            .collect()
    };
    // Background ranks map onto a separate permutation of the vocabulary.
    let mut background_ids: Vec<u32> = (0..vocab).collect();
    background_ids.shuffle(&mut rng);
    let zipf = Zipf::new(f64::from(vocab), 1.1).map_err(|e| Error::Invalid(e.to_string()))?;

    let per_topic = cfg.docs.div_ceil(cfg.queries);
    let facets_per_topic = per_topic.div_ceil(cfg.facet_size);
    let mut topics = Vec::with_capacity(cfg.queries);
    for _ in 0..cfg.queries {
        let centre = gaussian_unit(&mut rng, cfg.dense_dim);
        let terms = take_terms(cfg.topic_terms);
        let facets = (0..facets_per_topic)
            .map(|_| Facet {
                direction: gaussian_unit(&mut rng, cfg.dense_dim),
                offset: rng.random_range(0.35..1.3),
                terms: Vec::new(),
            })
            .collect::<Vec<_>>();
        topics.push(Topic { centre, terms, facets });
    }
    for t in &mut topics {
        for f in &mut t.facets {
            f.terms = take_terms(cfg.facet_terms);
        }
    }

    let background = |rng: &mut ChaCha8Rng, n: usize, lo: f32, hi: f32, into: &mut std::collections::BTreeMap<u32, f32>| {
        for _ in 0..n {
            let rank = zipf.sample(rng) as usize - 1;
            let id = background_ids[rank.min(background_ids.len() - 1)];
            let w: f32 = rng.random_range(lo..hi);
            let e = into.entry(id).or_insert(0.0);
            *e = e.max(w);
        }
    };

    let noise = 0.15;
    let mut docs = Vec::with_capacity(cfg.docs);
    let mut qrels = Qrels::new();
    for i in 0..cfg.docs {
        let t = i % cfg.queries;
        let j = i / cfg.queries;
        let facet_no = j / cfg.facet_size;
        let topic = &topics[t];
        let facet = &topic.facets[facet_no];

        let n = gaussian_unit(&mut rng, cfg.dense_dim);
        let v: Vec<f64> = (0..cfg.dense_dim)
            .map(|k| topic.centre[k] + facet.offset * facet.direction[k] + noise * n[k])
            .collect();
        let dense = unit_f32(&v)?;

        let closeness = (1.0 / (1.0 + facet.offset)) as f32;
        let mut w = std::collections::BTreeMap::new();
        for &term in &topic.terms {
            if rng.random_bool(0.7) {
                w.insert(term, 2.0 * closeness * rng.random_range(0.8f32..1.2));
            }
        }
        for &term in &facet.terms {
            w.insert(term, rng.random_range(0.9f32..1.1));
        }
        background(&mut rng, cfg.background_terms, 0.05, 0.4, &mut w);
        let sparse = sparse(vocab, w)?;

        let doc_id = format!("doc{i:06}");
        let grade = if facet.offset < 0.7 { 2 } else { 1 };
        qrels.insert(&format!("q{t:03}"), &doc_id, grade)?;
        docs.push(CorpusLine {
            id: doc_id,
            title: format!("Topic {t} facet {facet_no} report {j}"),
            abstract_text: format!(
                "Synthetic abstract for topic {t}, facet {facet_no}; near-duplicate {} of its facet.",
                j % cfg.facet_size
            ),
            dense: Some(dense.into_inner()),
            sparse: Some(SparseJson::from(&sparse)),
        });
    }

    let mut queries = Vec::with_capacity(cfg.queries);
    for (t, topic) in topics.iter().enumerate() {
        let n = gaussian_unit(&mut rng, cfg.dense_dim);
        let v: Vec<f64> = (0..cfg.dense_dim).map(|k| topic.centre[k] + 0.3 * n[k]).collect();
        let mut w = std::collections::BTreeMap::new();
        for &term in &topic.terms {
            if rng.random_bool(0.6) {
                w.insert(term, rng.random_range(0.5f32..1.5));
            }
        }
        background(&mut rng, cfg.query_background_terms, 0.05, 0.3, &mut w);
        queries.push(QueryRecord {
            query_id: format!("q{t:03}"),
            text: format!("topic {t}"),
            dense: Some(unit_f32(&v)?),
            sparse: Some(sparse(vocab, w)?),
        });
    }

    Ok(SynthCorpus { docs, queries, qrels })
}

impl SynthCorpus {
    /// Writes `corpus.jsonl`, `queries.jsonl` and `qrels.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_lines(dir.join("corpus.jsonl"), &self.docs)?;
        write_lines(dir.join("queries.jsonl"), self.queries.iter().map(QueryLine::from))?;
        let path = dir.join("qrels.txt");
        std::fs::write(&path, trec::format_qrels(&self.qrels)).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            docs: 120,
            queries: 6,
            dense_dim: 32,
            vocab_dim: 2000,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic_and_valid() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.docs, b.docs);
        assert_eq!(a.queries, b.queries);
        assert_eq!(a.docs.len(), 120);
        assert_eq!(a.queries.len(), 6);
        assert_eq!(a.qrels.len(), 120);
        for d in &a.docs {
            let (dense, sparse) = d.vectors(32, 2000).unwrap().unwrap();
            assert!(dense.is_unit());
            assert!(!sparse.is_empty());
        }
    }

    #[test]
    fn near_duplicates_are_closer_than_other_facets() {
        let c = generate(&small()).unwrap();
        let v = |i: usize| DenseVec::new(c.docs[i].dense.clone().unwrap()).unwrap();
        // docs 0 and 6 share topic 0, facet 0; doc 48 is topic 0, facet 1
        let same = hybridsearch_core::cosine(&v(0), &v(6)).unwrap();
        let other = hybridsearch_core::cosine(&v(0), &v(48)).unwrap();
        assert!(same > 0.9, "{same}");
        assert!(other < same);
    }
}
