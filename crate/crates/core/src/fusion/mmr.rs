//! Greedy maximal marginal relevance.
//!
//! ```text
//! pick_1     = argmax_d rel(d)
//! pick_{t+1} = argmax_d  lambda * rel(d) - (1 - lambda) * max_{s in S} sim(d, s)
//! ```
//!
//! `rel` is cosine to the query reference vector by default; `sim` is cosine
//! between document vectors. Ties go to the smaller doc_id.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{by_score_then_id, RankedList};
use crate::vector::{cosine, DenseVec};

/// Where the relevance term comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Relevance {
    /// Cosine between the query reference vector and the document vector.
    #[default]
    Cosine,
    /// The score carried by the pool's hits.
    RetrievalScore,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmrConfig {
    /// Relevance weight; `1.0` disables the diversity term.
    pub lambda: f64,
    /// Only the first `pool_size` pooled hits are considered.
    pub pool_size: usize,
    pub output_size: usize,
    pub relevance: Relevance,
}

impl Default for MmrConfig {
    fn default() -> Self {
        Self {
            lambda: 0.7,
            pool_size: 50,
            output_size: 10,
            relevance: Relevance::Cosine,
        }
    }
}

impl MmrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::param(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        if self.output_size > self.pool_size {
            return Err(Error::param(format!(
                "mmr output size {} exceeds pool size {}",
                self.output_size, self.pool_size
            )));
        }
        Ok(())
    }
}

/// Reranks `pool` by MMR. Output scores are the objective value each
/// document had when it was selected (plain relevance for the first pick).
pub fn mmr_rerank(
    pool: &RankedList,
    query_vec: &DenseVec,
    doc_vecs: &BTreeMap<String, DenseVec>,
    config: &MmrConfig,
) -> Result<RankedList> {
    config.validate()?;
    if pool.is_empty() {
        return Err(Error::Empty("mmr candidate pool"));
    }
    let candidates = &pool.hits[..pool.len().min(config.pool_size)];
    let mut vecs = Vec::with_capacity(candidates.len());
    let mut rel = Vec::with_capacity(candidates.len());
    for hit in candidates {
        let v = doc_vecs
            .get(&hit.doc_id)
            .ok_or_else(|| Error::MissingVector(hit.doc_id.clone()))?;
        rel.push(match config.relevance {
            Relevance::Cosine => cosine(query_vec, v)?,
            Relevance::RetrievalScore => hit.score,
        });
        vecs.push(v);
    }

    let ids: Vec<&str> = candidates.iter().map(|h| h.doc_id.as_str()).collect();
    let order = greedy_select(&ids, &rel, |i, j| cosine(vecs[i], vecs[j]), config.lambda, config.output_size)?;
    let picked = order
        .into_iter()
        .map(|(i, objective)| (candidates[i].doc_id.clone(), objective))
        .collect();
    Ok(RankedList::from_ordered(pool.query_id.clone(), picked))
}

/// Greedy MMR over precomputed relevance values and a pairwise similarity
/// function. Returns `(candidate index, objective at selection)` pairs.
pub(crate) fn greedy_select<F>(
    ids: &[&str],
    rel: &[f64],
    mut sim: F,
    lambda: f64,
    want: usize,
) -> Result<Vec<(usize, f64)>>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    let n = ids.len();
    let want = want.min(n);
    // Largest similarity to anything selected so far, per candidate.
    let mut max_sim = alloc::vec![f64::NEG_INFINITY; n];
    let mut taken = alloc::vec![false; n];
    let mut picked = Vec::with_capacity(want);
    for step in 0..want {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| !taken[i]) {
            let objective = if step == 0 {
                rel[i]
            } else {
                lambda * rel[i] - (1.0 - lambda) * max_sim[i]
            };
            let better = match best {
                None => true,
                Some((j, b)) => by_score_then_id(objective, ids[i], b, ids[j]).is_lt(),
            };
            if better {
                best = Some((i, objective));
            }
        }
        let (chosen, objective) = best.expect("at least one candidate remains");
        taken[chosen] = true;
        picked.push((chosen, objective));
        if step + 1 == want {
            break;
        }
        for i in (0..n).filter(|&i| !taken[i]) {
            let s = sim(i, chosen)?;
            if s > max_sim[i] {
                max_sim[i] = s;
            }
        }
    }
    Ok(picked)
}
