//! Reference implementations written directly from the formulas, without
//! sharing code with the library. Used by the property tests and the
//! acceptance runner.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

fn order(a: &(String, f64), b: &(String, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Sum of `w_r / (k + rank_r(d))` over every (document, list) pair in which
/// the document occurs. Lists are given as ordered doc ids (rank = position + 1).
pub fn rrf(lists: &[Vec<String>], weights: &[f64], k: f64, limit: usize) -> Vec<(String, f64)> {
    let docs: BTreeSet<&String> = lists.iter().flatten().collect();
    let mut out = Vec::new();
    for doc in docs {
        let mut score = 0.0;
        for (list, w) in lists.iter().zip(weights) {
            for (pos, id) in list.iter().enumerate() {
                if id == doc {
                    score += w / (k + (pos + 1) as f64);
                }
            }
        }
        out.push((doc.clone(), score));
    }
    out.sort_by(order);
    out.truncate(limit);
    out
}

pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut s = 0.0f64;
    for i in 0..a.len() {
        s += a[i] as f64 * b[i] as f64;
    }
    s
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let c = dot(a, b) / (dot(a, a) * dot(b, b)).sqrt();
    c.clamp(-1.0, 1.0)
}

/// Greedy MMR written as a literal loop: every step recomputes the maximum
/// similarity against the whole selected set.
pub fn mmr(ids: &[String], vecs: &[Vec<f32>], query: &[f32], lambda: f64, want: usize) -> Vec<String> {
    let rel: Vec<f64> = vecs.iter().map(|v| cosine(query, v)).collect();
    let mut selected: Vec<usize> = Vec::new();
    while selected.len() < want.min(ids.len()) {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..ids.len() {
            if selected.contains(&i) {
                continue;
            }
            let value = if selected.is_empty() {
                rel[i]
            } else {
                let max_sim = selected
                    .iter()
                    .map(|&s| cosine(&vecs[i], &vecs[s]))
                    .fold(f64::NEG_INFINITY, f64::max);
                lambda * rel[i] - (1.0 - lambda) * max_sim
            };
            let take = match best {
                None => true,
                Some((j, b)) => value > b || (value == b && ids[i] < ids[j]),
            };
            if take {
                best = Some((i, value));
            }
        }
        selected.push(best.unwrap().0);
    }
    selected.into_iter().map(|i| ids[i].clone()).collect()
}

pub fn ild(vecs: &[Vec<f32>]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0;
    for i in 0..vecs.len() {
        for j in 0..vecs.len() {
            if i < j {
                sum += 1.0 - cosine(&vecs[i], &vecs[j]);
                n += 1;
            }
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// The five cutoff metrics, straight from their definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub ndcg: f64,
    pub precision: f64,
    pub mrr: f64,
    pub map: f64,
    pub hit_rate: f64,
}

pub fn metrics(run: &[String], qrels: &BTreeMap<String, u32>, k: usize) -> Metrics {
    let grade = |d: &String| *qrels.get(d).unwrap_or(&0);
    let cut: Vec<&String> = run.iter().take(k).collect();

    let mut dcg = 0.0;
    for (i, d) in cut.iter().enumerate() {
        dcg += grade(d) as f64 / ((i + 2) as f64).log2();
    }
    let mut grades: Vec<u32> = qrels.values().cloned().collect();
    grades.sort();
    grades.reverse();
    let mut idcg = 0.0;
    for (i, g) in grades.iter().take(k).enumerate() {
        idcg += *g as f64 / ((i + 2) as f64).log2();
    }
    let ndcg = if idcg == 0.0 { 0.0 } else { dcg / idcg };

    let rel_flags: Vec<bool> = cut.iter().map(|d| grade(d) >= 1).collect();
    let hits = rel_flags.iter().filter(|&&r| r).count();
    let precision = hits as f64 / k as f64;
    let mrr = match rel_flags.iter().position(|&r| r) {
        Some(p) => 1.0 / (p + 1) as f64,
        None => 0.0,
    };
    let total_rel = qrels.values().filter(|&&g| g >= 1).count();
    let map = if total_rel == 0 {
        0.0
    } else {
        let mut s = 0.0;
        for i in 0..rel_flags.len() {
            if rel_flags[i] {
                let rel_so_far = rel_flags[..=i].iter().filter(|&&r| r).count();
                s += rel_so_far as f64 / (i + 1) as f64;
            }
        }
        s / total_rel.min(k) as f64
    };
    let hit_rate = if hits > 0 { 1.0 } else { 0.0 };
    Metrics {
        ndcg,
        precision,
        mrr,
        map,
        hit_rate,
    }
}

/// Sparse vector given as ascending `(index, value)` pairs.
pub fn sparse_dot(a: &[(u32, f32)], b: &[(u32, f32)]) -> f64 {
    let mut s = 0.0f64;
    for (i, x) in a {
        if let Some((_, y)) = b.iter().find(|(j, _)| j == i) {
            s += *x as f64 * *y as f64;
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct ScanDoc {
    pub id: String,
    pub dense: Vec<f32>,
    pub sparse: Vec<(u32, f32)>,
}

/// Exhaustive hybrid scoring of every document, ranked and truncated.
pub fn hybrid_scan(
    docs: &[ScanDoc],
    dense_q: &[f32],
    sparse_q: &[(u32, f32)],
    alpha: f64,
    top_k: usize,
) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = docs
        .iter()
        .map(|d| {
            let score = alpha * dot(dense_q, &d.dense) + (1.0 - alpha) * sparse_dot(sparse_q, &d.sparse);
            (d.id.clone(), score)
        })
        .collect();
    scored.sort_by(order);
    scored.truncate(top_k);
    scored
}

/// Nearest-rank percentile: the `ceil(p * n)`-th smallest sample.
pub fn nearest_rank(samples: &[f64], p: f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let rank = (p * s.len() as f64).ceil().max(1.0) as usize;
    s[rank - 1]
}
