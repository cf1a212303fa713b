//! Deterministic stand-in for the neural encoders, for tests and demos.
//!
//! Text is lowercased and split on whitespace (punctuation trimmed from token
//! edges). Each token hashes (FNV-1a) to a vocabulary slot whose value is
//! `ln(1 + count)`. The dense vector is the L2-normalised projection of that
//! sparse vector through a private matrix seeded independently of the fusion
//! projection.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::projection::ProjectionMatrix;
use crate::vector::{l2_normalize, DenseVec, SparseVec};

/// Default seed for the toy dense projection.
pub const DEFAULT_TOY_SEED: u64 = 0x70E_C0DE;

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(|t| t.chars().flat_map(char::to_lowercase).collect())
        .collect()
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn token_slot(token: &str, vocab_dim: u32) -> u32 {
    (fnv1a(token.as_bytes()) % u64::from(vocab_dim)) as u32
}

#[derive(Debug, Clone)]
pub struct ToyEncoder {
    seed: u64,
    matrix: ProjectionMatrix,
}

impl ToyEncoder {
    pub fn new(dense_dim: usize, vocab_dim: u32, seed: u64) -> Result<Self> {
        Ok(Self {
            seed,
            matrix: ProjectionMatrix::build(seed, dense_dim, vocab_dim)?,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dense_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn vocab_dim(&self) -> u32 {
        self.matrix.cols()
    }

    pub fn encode_sparse(&self, text: &str) -> Result<SparseVec> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(Error::param("text contains no tokens"));
        }
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for t in &tokens {
            *counts.entry(token_slot(t, self.vocab_dim())).or_insert(0) += 1;
        }
        let (indices, values) = counts
            .into_iter()
            .map(|(slot, n)| (slot, libm::log1p(f64::from(n)) as f32))
            .unzip();
        SparseVec::new(self.vocab_dim(), indices, values)
    }

    pub fn encode(&self, text: &str) -> Result<(DenseVec, SparseVec)> {
        let sparse = self.encode_sparse(text)?;
        let dense = l2_normalize(&self.matrix.project(&sparse)?)?;
        Ok((dense, sparse))
    }
}

/// One-shot encoding; builds the encoder's matrix on every call.
pub fn toy_encode(text: &str, dense_dim: usize, vocab_dim: u32, seed: u64) -> Result<(DenseVec, SparseVec)> {
    ToyEncoder::new(dense_dim, vocab_dim, seed)?.encode(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::sparse_dot;

    fn encoder() -> ToyEncoder {
        ToyEncoder::new(32, 1000, DEFAULT_TOY_SEED).unwrap()
    }

    #[test]
    fn deterministic() {
        let e = encoder();
        assert_eq!(e.encode("Mask efficacy, trials").unwrap(), e.encode("Mask efficacy, trials").unwrap());
        assert_eq!(
            toy_encode("a b", 32, 1000, 3).unwrap(),
            toy_encode("a b", 32, 1000, 3).unwrap()
        );
    }

    #[test]
    fn repeated_token_value() {
        let (dense, sparse) = encoder().encode("covid covid").unwrap();
        assert_eq!(sparse.nnz(), 1);
        assert_eq!(sparse.values()[0], 3f64.ln() as f32);
        assert!(dense.is_unit());
        // case and punctuation do not create new tokens
        assert_eq!(encoder().encode_sparse("COVID, covid!").unwrap(), sparse);
    }

    #[test]
    fn disjoint_vocabulary() {
        let e = encoder();
        let a = e.encode_sparse("vaccine").unwrap();
        let b = e.encode_sparse("ventilator").unwrap();
        assert_ne!(a.indices(), b.indices(), "fixture tokens must not collide");
        assert_eq!(sparse_dot(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn empty_text_is_an_error() {
        assert!(encoder().encode("  ... ").is_err());
    }
}
