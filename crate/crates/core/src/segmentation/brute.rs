//! Exhaustive search over every feasible division, for small inputs.

use super::score::SegmentScorer;
use super::{LabelConvention, Segmentation};
use crate::error::{invalid, Error, Result};
use crate::geometry::VelocitySeries;

/// Largest number of boundary placements [`brute_force_segment`] will visit.
pub const MAX_PLACEMENTS: u128 = 1_000_000;

/// Number of ways to place `k - 1` boundaries in a length-`len` series with
/// every segment at least `min_len` long: `C(len - k*min_len + k - 1, k - 1)`.
pub fn count_placements(len: usize, k: usize, min_len: usize) -> u128 {
    if k == 0 || k * min_len > len {
        return 0;
    }
    let slack = (len - k * min_len) as u128;
    let r = (k - 1) as u128;
    let mut c: u128 = 1;
    for i in 1..=r {
        c = c * (slack + i) / i;
        if c > u64::MAX as u128 {
            return c;
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exhaustive {
    pub segmentation: Segmentation,
    pub objective: f64,
    /// Boundary placements visited; each is scored under both label phases.
    pub placements: u64,
}

/// Globally optimal `k`-segment division by enumeration.
pub fn brute_force_segment(
    vel: &VelocitySeries,
    k: usize,
    min_len: usize,
    convention: LabelConvention,
) -> Result<Exhaustive> {
    let n = vel.len();
    if k == 0 {
        return Err(invalid("need at least one segment"));
    }
    let min_len = min_len.max(1);
    if k * min_len > n {
        return Err(Error::Infeasible {
            segments: k,
            min_len,
            len: n,
        });
    }
    let placements = count_placements(n, k, min_len);
    if placements > MAX_PLACEMENTS {
        return Err(Error::SearchTooLarge {
            placements,
            limit: MAX_PLACEMENTS,
        });
    }

    let scorer = SegmentScorer::new(vel);
    let mut current = Vec::with_capacity(k - 1);
    let mut best: Option<(f64, Vec<usize>, f64)> = None;
    let mut visited = 0u64;
    enumerate(n, k - 1, min_len, min_len, &mut current, &mut |b| {
        visited += 1;
        let alt = scorer.alternating_sum(b);
        // both phases: +alt and -alt
        let value = alt.abs();
        if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
            best = Some((value, b.to_vec(), alt));
        }
    });
    let (objective, boundaries, alt) = best.expect("at least one placement");
    let segmentation = Segmentation::alternating(boundaries, convention.first_label(alt), n)?;
    Ok(Exhaustive {
        segmentation,
        objective,
        placements: visited,
    })
}

fn enumerate(
    len: usize,
    remaining: usize,
    lowest: usize,
    min_len: usize,
    current: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if remaining == 0 {
        visit(current);
        return;
    }
    // leave room for `remaining` more segments of length min_len
    let highest = len - remaining * min_len;
    for b in lowest..=highest {
        current.push(b);
        enumerate(len, remaining - 1, b + min_len, min_len, current, visit);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::phase::Phase;
    use crate::segmentation::objective;
    use approx::assert_relative_eq;

    fn wavy(n: usize) -> VelocitySeries {
        VelocitySeries::new(
            (0..n)
                .map(|i| {
                    let t = i as f64;
                    Vec3::new((t * 0.9).sin(), (t * t * 0.07).cos(), 0.1 * t)
                })
                .collect(),
        )
    }

    #[test]
    fn counts_placements() {
        let r = brute_force_segment(&wavy(8), 2, 2, LabelConvention::RewardExploitation).unwrap();
        assert_eq!(r.placements, 5);
        assert_eq!(count_placements(8, 2, 2), 5);
        assert_eq!(count_placements(40, 4, 5), 1771);
        for (n, k, m) in [(12, 3, 2), (20, 4, 3), (15, 1, 4)] {
            let r = brute_force_segment(&wavy(n), k, m, LabelConvention::RewardExploitation).unwrap();
            assert_eq!(r.placements as u128, count_placements(n, k, m));
        }
    }

    #[test]
    fn single_segment_takes_the_better_label() {
        let v = wavy(10);
        let r = brute_force_segment(&v, 1, 2, LabelConvention::RewardExploitation).unwrap();
        assert!(r.segmentation.boundaries.is_empty());
        assert_eq!(r.segmentation.labels, vec![Phase::Exploitation]);
        let f = brute_force_segment(&v, 1, 2, LabelConvention::RewardExploration).unwrap();
        assert_eq!(f.segmentation.labels, vec![Phase::Exploration]);
        assert_eq!(r.objective, f.objective);
    }

    #[test]
    fn result_is_self_consistent() {
        for conv in [LabelConvention::RewardExploitation, LabelConvention::RewardExploration] {
            let v = wavy(24);
            let r = brute_force_segment(&v, 3, 3, conv).unwrap();
            let recomputed = objective(&v, &r.segmentation, conv).unwrap();
            assert_relative_eq!(recomputed, r.objective, epsilon = 1e-12);
        }
    }

    #[test]
    fn guard_refuses_huge_searches() {
        let v = wavy(400);
        assert!(matches!(
            brute_force_segment(&v, 6, 2, LabelConvention::RewardExploitation),
            Err(Error::SearchTooLarge { .. })
        ));
    }
}
