use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Latency samples in milliseconds with mean and nearest-rank P95.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyStats {
    pub samples: Vec<f64>,
    pub avg: f64,
    pub p95: f64,
}

impl LatencyStats {
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("latency samples"));
        }
        if samples.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::param("latency samples must be finite and non-negative"));
        }
        let avg = samples.iter().sum::<f64>() / samples.len() as f64;
        Ok(Self {
            p95: nearest_rank(&samples, 95),
            avg,
            samples,
        })
    }
}

/// The `ceil(p/100 * n)`-th smallest sample.
fn nearest_rank(samples: &[f64], percent: usize) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank = (percent * n).div_ceil(100).max(1);
    sorted[rank - 1]
}
