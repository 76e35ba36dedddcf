/// Picks the knee of a score-versus-`k` curve: the entry furthest from the
/// chord joining the first and last points. Ties and flat or straight
/// curves resolve to the smallest `k`; fewer than three entries also return
/// the smallest `k`.
///
/// `scores` must be sorted by `k`.
pub fn elbow_select(scores: &[(usize, f64)]) -> usize {
    let Some(&(k_first, s_first)) = scores.first() else {
        return 0;
    };
    if scores.len() < 3 {
        return k_first;
    }
    let (k_last, s_last) = *scores.last().unwrap();
    let (dx, dy) = ((k_last - k_first) as f64, s_last - s_first);
    let chord = dx.hypot(dy);

    let distances: Vec<f64> = scores
        .iter()
        .map(|&(k, s)| ((k - k_first) as f64 * dy - (s - s_first) * dx).abs() / chord)
        .collect();
    let max = distances.iter().copied().fold(0.0, f64::max);
    let scale = scores.iter().map(|(_, s)| s.abs()).fold(0.0, f64::max);
    if max <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return k_first;
    }
    // smallest k within rounding of the maximum
    let idx = distances.iter().position(|d| *d >= max * (1.0 - 1e-12)).unwrap();
    scores[idx].0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_knee() {
        // chord from (2, 10) to (6, 4.6); vertical gaps 3.65, 2.5, 1.25
        let s = [(2, 10.0), (3, 5.0), (4, 4.8), (5, 4.7), (6, 4.6)];
        assert_eq!(elbow_select(&s), 3);
    }

    #[test]
    fn collinear_scores_pick_smallest_k() {
        let s: Vec<(usize, f64)> = (2..9).map(|k| (k, 1.0 + 0.5 * k as f64)).collect();
        assert_eq!(elbow_select(&s), 2);
        let flat: Vec<(usize, f64)> = (2..9).map(|k| (k, 0.0)).collect();
        assert_eq!(elbow_select(&flat), 2);
    }

    #[test]
    fn too_few_entries_fall_back() {
        assert_eq!(elbow_select(&[(2, 1.0), (3, 9.0)]), 2);
        assert_eq!(elbow_select(&[(2, 1.0)]), 2);
    }

    #[test]
    fn increasing_concave_curve() {
        let s = [(2, 1.0), (3, 3.0), (4, 3.5), (5, 3.7), (6, 3.8), (7, 3.85)];
        assert_eq!(elbow_select(&s), 3);
    }
}
