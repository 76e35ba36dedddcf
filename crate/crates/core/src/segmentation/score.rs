use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::geometry::{Vec3, VelocitySeries};

/// Spread of the velocity vectors in `[start, end)` about their mean,
/// `sqrt(sum |v_i - mean|^2 / (end - start)) / 2pi`.
///
/// Zero for a perfectly straight constant-speed segment; grows with
/// turning and speed changes.
pub fn exploration_score(vel: &VelocitySeries, start: usize, end: usize) -> Result<f64> {
    if end <= start {
        return Err(invalid(format!("segment [{start}, {end}) is empty or reversed")));
    }
    if end > vel.len() {
        return Err(invalid(format!(
            "segment end {end} is past the series length {}",
            vel.len()
        )));
    }
    let seg = &vel.values[start..end];
    let m = seg.len() as f64;
    // shifted by the first value so a constant segment is exactly zero
    let origin = seg[0];
    let mean = origin + seg.iter().fold(Vec3::ZERO, |acc, v| acc + (*v - origin)) / m;
    let ss: f64 = seg.iter().map(|v| (*v - mean).norm_squared()).sum();
    Ok((ss / m).sqrt() / (2.0 * PI))
}

/// O(1) segment scores from prefix sums of a centred series.
///
/// Used inside the optimizers, where millions of segments are scored.
/// Values agree with [`exploration_score`] to rounding error.
#[derive(Debug, Clone)]
pub struct SegmentScorer {
    sum: Vec<Vec3>,
    sum_sq: Vec<f64>,
}

impl SegmentScorer {
    pub fn new(vel: &VelocitySeries) -> Self {
        let n = vel.len();
        let centre = if n > 0 {
            vel.values.iter().fold(Vec3::ZERO, |a, v| a + *v) / n as f64
        } else {
            Vec3::ZERO
        };
        let mut sum = Vec::with_capacity(n + 1);
        let mut sum_sq = Vec::with_capacity(n + 1);
        let (mut s, mut q) = (Vec3::ZERO, 0.0);
        sum.push(s);
        sum_sq.push(q);
        for v in &vel.values {
            let d = *v - centre;
            s += d;
            q += d.norm_squared();
            sum.push(s);
            sum_sq.push(q);
        }
        Self { sum, sum_sq }
    }

    pub fn len(&self) -> usize {
        self.sum.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Score of `[start, end)`; the caller guarantees `start < end <= len`.
    pub fn score(&self, start: usize, end: usize) -> f64 {
        let m = (end - start) as f64;
        let s = self.sum[end] - self.sum[start];
        let q = self.sum_sq[end] - self.sum_sq[start];
        let ss = (q - s.norm_squared() / m).max(0.0);
        (ss / m).sqrt() / (2.0 * PI)
    }

    /// Alternating sum `score_0 - score_1 + score_2 - ...` over the
    /// segments delimited by `boundaries`.
    pub fn alternating_sum(&self, boundaries: &[usize]) -> f64 {
        let mut start = 0;
        let mut sign = 1.0;
        let mut total = 0.0;
        for &b in boundaries.iter().chain(std::iter::once(&self.len())) {
            total += sign * self.score(start, b);
            sign = -sign;
            start = b;
        }
        total
    }
}
