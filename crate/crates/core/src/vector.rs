//! Dense and sparse vectors.
//!
//! Values are stored as `f32`; every reduction (dot products, norms)
//! accumulates in `f64`, strictly left to right, so results are reproducible
//! bit-for-bit and brute-force scans agree exactly with indexed scoring.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tolerance for "unit-norm" checks.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-5;

/// A fixed-dimension dense vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVec(Vec<f32>);

impl DenseVec {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if let Some(position) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { position });
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(alloc::vec![0.0; dim])
    }

    /// Standard basis vector `e_axis`.
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut v = alloc::vec![0.0; dim];
        v[axis] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm_slice(&self.0)
    }

    pub fn is_unit(&self) -> bool {
        libm::fabs(self.norm() - 1.0) <= UNIT_NORM_TOLERANCE
    }

    pub(crate) fn from_f64(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| v as f32).collect())
    }
}

/// A sparse vector: strictly increasing indices with positive finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    indices: Vec<u32>,
    values: Vec<f32>,
    vocab_dim: u32,
}

impl SparseVec {
    /// Builds a sparse vector from `(index, value)` pairs that are already in
    /// strictly increasing index order.
    pub fn new(vocab_dim: u32, indices: Vec<u32>, values: Vec<f32>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::InvalidSparse(format!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        for (pos, pair) in indices.windows(2).enumerate() {
            if pair[0] >= pair[1] {
                return Err(Error::InvalidSparse(format!(
                    "indices not strictly increasing at position {}",
                    pos + 1
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= vocab_dim {
                return Err(Error::InvalidSparse(format!(
                    "index {last} out of range for vocabulary of {vocab_dim}"
                )));
            }
        }
        for (pos, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidSparse(format!(
                    "value {v} at position {pos} is not a positive finite number"
                )));
            }
        }
        Ok(Self {
            indices,
            values,
            vocab_dim,
        })
    }

    /// Builds a sparse vector from unordered pairs. Duplicate indices are an
    /// error.
    pub fn from_pairs(vocab_dim: u32, mut pairs: Vec<(u32, f32)>) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        let (indices, values) = pairs.into_iter().unzip();
        Self::new(vocab_dim, indices, values)
    }

    pub fn empty(vocab_dim: u32) -> Self {
        Self {
            indices: Vec::new(),
            values: Vec::new(),
            vocab_dim,
        }
    }

    pub fn vocab_dim(&self) -> u32 {
        self.vocab_dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f32)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        norm_slice(&self.values)
    }

    /// Multiplies every value by a positive finite factor.
    pub fn scaled(&self, factor: f32) -> Result<Self> {
        Self::new(
            self.vocab_dim,
            self.indices.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

pub(crate) fn dot_slices(a: &[f32], b: &[f32]) -> f64 {
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        acc += f64::from(*x) * f64::from(*y);
    }
    acc
}

pub(crate) fn norm_slice(v: &[f32]) -> f64 {
    libm::sqrt(dot_slices(v, v))
}

pub fn dot(a: &DenseVec, b: &DenseVec) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(dot_slices(&a.0, &b.0))
}

/// Sum of products over shared indices, accumulated in ascending index order.
pub fn sparse_dot(a: &SparseVec, b: &SparseVec) -> Result<f64> {
    if a.vocab_dim != b.vocab_dim {
        return Err(Error::VocabMismatch {
            left: a.vocab_dim,
            right: b.vocab_dim,
        });
    }
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0f64;
    while i < a.indices.len() && j < b.indices.len() {
        match a.indices[i].cmp(&b.indices[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                acc += f64::from(a.values[i]) * f64::from(b.values[j]);
                i += 1;
                j += 1;
            }
        }
    }
    Ok(acc)
}

pub fn l2_normalize(v: &DenseVec) -> Result<DenseVec> {
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::zero_norm("cannot normalise"));
    }
    Ok(DenseVec(
        v.0.iter()
            .map(|&x| (f64::from(x) / norm) as f32)
            .collect(),
    ))
}

/// Cosine similarity clamped to `[-1, 1]`.
pub fn cosine(a: &DenseVec, b: &DenseVec) -> Result<f64> {
    let d = dot(a, b)?;
    let aa = dot_slices(&a.0, &a.0);
    let bb = dot_slices(&b.0, &b.0);
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::zero_norm("cosine of a zero vector"));
    }
    // sqrt(x * x) == |x| exactly, so cosine(v, v) is exactly 1
    Ok((d / libm::sqrt(aa * bb)).clamp(-1.0, 1.0))
}
