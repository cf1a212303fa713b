use crate::error::Result;
use crate::vector::{cosine, DenseVec};

/// Intra-list diversity of a result prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ild {
    pub value: f64,
    /// Fewer than two vectors were available; `value` is 0 by convention.
    pub degenerate: bool,
}

/// Mean pairwise cosine dissimilarity `1 - cos(v_i, v_j)` over the first `k`
/// vectors.
pub fn ild_at_k(vectors: &[DenseVec], k: usize) -> Result<Ild> {
    let top = &vectors[..vectors.len().min(k)];
    if top.len() < 2 {
        return Ok(Ild {
            value: 0.0,
            degenerate: true,
        });
    }
    let mut total = 0.0;
    let mut pairs = 0u64;
    for i in 0..top.len() {
        for j in i + 1..top.len() {
            total += 1.0 - cosine(&top[i], &top[j])?;
            pairs += 1;
        }
    }
    Ok(Ild {
        value: total / pairs as f64,
        degenerate: false,
    })
}
