//! Sparse random projection from vocabulary space into dense space, and the
//! convex combination used to build single-pass fusion vectors.
//!
//! The projection matrix follows Achlioptas' database-friendly construction:
//! each entry is `+sqrt(3)` with probability 1/6, `-sqrt(3)` with probability
//! 1/6 and `0` otherwise. Entries are drawn from ChaCha8 keyed by
//! `(seed, column)` with the row as the position in the stream, so any column
//! can be regenerated independently and the matrix is bit-reproducible.
//!
//! No `1/sqrt(rows)` scale is applied: fusion normalises the projected vector
//! immediately, so the scale cannot affect retrieval.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::types::DocRecord;
use crate::vector::{l2_normalize, DenseVec, SparseVec};

/// Magnitude of every non-zero entry.
pub const ENTRY: f64 = 1.732_050_807_568_877_2;

/// Seed used when none is configured.
pub const DEFAULT_SEED: u64 = 0x5EED_B5B5;

const SIGN_BIT: u32 = 1 << 31;
const LOW: f64 = 1.0 / 6.0;
const HIGH: f64 = 5.0 / 6.0;

/// Column-major sparse projection matrix with `rows x cols` logical shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionMatrix {
    seed: u64,
    rows: usize,
    cols: u32,
    /// `col_start[j]..col_start[j + 1]` indexes `entries` for column `j`.
    col_start: Vec<u32>,
    /// Row index with the sign packed into the top bit.
    entries: Vec<u32>,
}

/// The uniform variate in `[0, 1)` that decides entry `(row, col)`.
pub fn entry_variate(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Generator for one column: ChaCha8 seeded from `seed`, stream = column.
pub fn column_rng(seed: u64, col: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(col));
    rng
}

impl ProjectionMatrix {
    pub fn build(seed: u64, rows: usize, cols: u32) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param(format!(
                "projection shape must be non-empty, got {rows}x{cols}"
            )));
        }
        if rows >= SIGN_BIT as usize {
            return Err(Error::param(format!("too many projection rows: {rows}")));
        }
        let mut col_start = Vec::with_capacity(cols as usize + 1);
        let mut entries = Vec::with_capacity(rows * cols as usize / 3 + 16);
        col_start.push(0);
        for col in 0..cols {
            let mut rng = column_rng(seed, col);
            for row in 0..rows as u32 {
                let u = entry_variate(&mut rng);
                if u < LOW {
                    entries.push(row);
                } else if u >= HIGH {
                    entries.push(row | SIGN_BIT);
                }
            }
            col_start.push(entries.len() as u32);
        }
        Ok(Self {
            seed,
            rows,
            cols,
            col_start,
            entries,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn nonzeros(&self) -> usize {
        self.entries.len()
    }

    pub fn density(&self) -> f64 {
        self.entries.len() as f64 / (self.rows as f64 * f64::from(self.cols))
    }

    /// Non-zero `(row, value)` pairs of one column, ascending by row.
    pub fn column(&self, col: u32) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_start[col as usize] as usize..self.col_start[col as usize + 1] as usize;
        self.entries[range].iter().map(|&e| {
            let value = if e & SIGN_BIT != 0 { -ENTRY } else { ENTRY };
            ((e & !SIGN_BIT) as usize, value)
        })
    }

    /// `R * s`, touching only the non-zero entries of `s`.
    pub fn project(&self, s: &SparseVec) -> Result<DenseVec> {
        if s.vocab_dim() != self.cols {
            return Err(Error::VocabMismatch {
                left: s.vocab_dim(),
                right: self.cols,
            });
        }
        let mut acc = vec![0.0f64; self.rows];
        for (col, value) in s.iter() {
            let value = f64::from(value);
            for (row, entry) in self.column(col) {
                acc[row] += entry * value;
            }
        }
        Ok(DenseVec::from_f64(&acc))
    }
}

pub fn build_projection(seed: u64, rows: usize, cols: u32) -> Result<ProjectionMatrix> {
    ProjectionMatrix::build(seed, rows, cols)
}

pub fn project(r: &ProjectionMatrix, s: &SparseVec) -> Result<DenseVec> {
    r.project(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixSide {
    Query,
    Document,
}

/// Weight on the dense side when mixing dense and projected vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaMix {
    value: f64,
    side: MixSide,
}

impl AlphaMix {
    pub const DEFAULT_QUERY: f64 = 0.95;
    pub const DEFAULT_DOC: f64 = 0.50;

    pub fn new(value: f64, side: MixSide) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::param(format!("alpha {value} outside [0, 1]")));
        }
        Ok(Self { value, side })
    }

    pub fn query(value: f64) -> Result<Self> {
        Self::new(value, MixSide::Query)
    }

    pub fn document(value: f64) -> Result<Self> {
        Self::new(value, MixSide::Document)
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn side(self) -> MixSide {
        self.side
    }
}

impl Default for AlphaMix {
    fn default() -> Self {
        Self {
            value: Self::DEFAULT_QUERY,
            side: MixSide::Query,
        }
    }
}

/// `normalize(alpha * d_hat + (1 - alpha) * p_hat)`.
///
/// At `alpha = 1` the projected side is ignored (it may be zero) and the
/// result is exactly `d_hat`; at `alpha = 0` it is exactly `p_hat`.
pub fn combine(d: &DenseVec, p: &DenseVec, alpha: AlphaMix) -> Result<DenseVec> {
    let d_hat = l2_normalize(d).map_err(|_| Error::zero_norm("dense vector of the combination"))?;
    let a = alpha.value();
    if a == 1.0 {
        return Ok(d_hat);
    }
    if d.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            left: d.dim(),
            right: p.dim(),
        });
    }
    let p_hat = l2_normalize(p).map_err(|_| {
        Error::zero_norm("projected sparse vector is zero; the sparse side activated no projected terms")
    })?;
    if a == 0.0 {
        return Ok(p_hat);
    }
    let b = 1.0 - a;
    let mixed: Vec<f64> = d_hat
        .as_slice()
        .iter()
        .zip(p_hat.as_slice())
        .map(|(&x, &y)| a * f64::from(x) + b * f64::from(y))
        .collect();
    let norm = libm::sqrt(mixed.iter().map(|m| m * m).sum::<f64>());
    if norm == 0.0 {
        return Err(Error::zero_norm("dense and projected vectors cancel out"));
    }
    Ok(DenseVec::from_f64(
        &mixed.iter().map(|m| m / norm).collect::<Vec<_>>(),
    ))
}

/// Document-side fusion vector: `combine(dense, R * sparse, alpha_doc)`.
pub fn fuse_document(doc: &DocRecord, r: &ProjectionMatrix, alpha_doc: AlphaMix) -> Result<DenseVec> {
    let fail = |reason: alloc::string::String| Error::InvalidDocument {
        doc_id: doc.doc_id.clone(),
        reason,
    };
    if doc.sparse.is_empty() && alpha_doc.value() < 1.0 {
        return Err(fail("empty sparse vector cannot be projected".into()));
    }
    let p = r.project(&doc.sparse).map_err(|e| fail(format!("{e}")))?;
    combine(&doc.dense, &p, alpha_doc).map_err(|e| fail(format!("{e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::DocMeta;
    use alloc::string::ToString;

    fn small() -> ProjectionMatrix {
        ProjectionMatrix::build(11, 64, 500).unwrap()
    }

    #[test]
    fn deterministic_and_entries_are_sqrt3() {
        let a = small();
        let b = small();
        assert_eq!(a, b);
        assert_ne!(a, ProjectionMatrix::build(12, 64, 500).unwrap());
        for col in 0..a.cols() {
            for (_, v) in a.column(col) {
                assert_eq!(v.abs(), 3f64.sqrt());
            }
        }
        assert!(ProjectionMatrix::build(1, 0, 5).is_err());
        assert!(ProjectionMatrix::build(1, 5, 0).is_err());
    }

    #[test]
    fn single_entry_selects_column() {
        let r = small();
        let s = SparseVec::new(500, vec![42], vec![1.0]).unwrap();
        let p = r.project(&s).unwrap();
        let mut expected = vec![0.0f32; 64];
        for (row, v) in r.column(42) {
            expected[row] = v as f32;
        }
        assert_eq!(p.as_slice(), &expected[..]);
        assert!(r.project(&SparseVec::empty(500)).unwrap().as_slice().iter().all(|&x| x == 0.0));
        assert!(r.project(&SparseVec::empty(501)).is_err());
    }

    #[test]
    fn doubling_is_exact() {
        let r = small();
        let s = SparseVec::new(500, vec![3, 77, 410], vec![0.5, 1.25, 2.0]).unwrap();
        let p = r.project(&s).unwrap();
        let p2 = r.project(&s.scaled(2.0).unwrap()).unwrap();
        for (a, b) in p.as_slice().iter().zip(p2.as_slice()) {
            assert!((2.0 * a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn combine_boundaries() {
        let d = DenseVec::new(vec![3.0, 4.0, 0.0]).unwrap();
        let p = DenseVec::new(vec![0.0, 0.0, 2.0]).unwrap();
        let d_hat = l2_normalize(&d).unwrap();
        let p_hat = l2_normalize(&p).unwrap();
        assert_eq!(combine(&d, &p, AlphaMix::query(1.0).unwrap()).unwrap(), d_hat);
        assert_eq!(combine(&d, &p, AlphaMix::query(0.0).unwrap()).unwrap(), p_hat);
        assert_eq!(
            combine(&d, &DenseVec::zeros(3), AlphaMix::query(1.0).unwrap()).unwrap(),
            d_hat
        );
    }

    #[test]
    fn combine_orthogonal_half() {
        let q = combine(
            &DenseVec::basis(4, 0),
            &DenseVec::basis(4, 1),
            AlphaMix::query(0.5).unwrap(),
        )
        .unwrap();
        let h = core::f32::consts::FRAC_1_SQRT_2;
        assert!((q.as_slice()[0] - h).abs() < 1e-7);
        assert!((q.as_slice()[1] - h).abs() < 1e-7);
        assert_eq!(&q.as_slice()[2..], &[0.0, 0.0]);
    }

    #[test]
    fn combine_errors() {
        let e1 = DenseVec::basis(2, 0);
        let neg = DenseVec::new(vec![-1.0, 0.0]).unwrap();
        assert!(matches!(
            combine(&e1, &DenseVec::zeros(2), AlphaMix::query(0.9).unwrap()),
            Err(Error::ZeroNorm { .. })
        ));
        assert!(matches!(
            combine(&e1, &neg, AlphaMix::query(0.5).unwrap()),
            Err(Error::ZeroNorm { .. })
        ));
        assert!(AlphaMix::query(1.01).is_err());
    }

    #[test]
    fn fuse_document_cases() {
        let r = small();
        let sparse = SparseVec::new(500, vec![1, 2, 3], vec![1.0, 1.0, 1.0]).unwrap();
        let p = l2_normalize(&r.project(&sparse).unwrap()).unwrap();
        let doc = DocRecord {
            doc_id: "d".to_string(),
            meta: DocMeta::default(),
            dense: p.clone(),
            sparse: sparse.clone(),
            fused: None,
        };
        let fixed = fuse_document(&doc, &r, AlphaMix::document(0.5).unwrap()).unwrap();
        for (a, b) in fixed.as_slice().iter().zip(p.as_slice()) {
            assert!((a - b).abs() < 1e-6);
        }
        let dense_only = fuse_document(&doc, &r, AlphaMix::document(1.0).unwrap()).unwrap();
        assert_eq!(dense_only, l2_normalize(&doc.dense).unwrap());

        let empty = DocRecord {
            sparse: SparseVec::empty(500),
            ..doc.clone()
        };
        let err = fuse_document(&empty, &r, AlphaMix::document(0.5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidDocument { ref doc_id, .. } if doc_id == "d"));
        assert!(fuse_document(&empty, &r, AlphaMix::document(1.0).unwrap()).is_ok());
    }
}
