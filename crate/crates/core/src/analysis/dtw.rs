//! Dynamic time warping with a mean-absolute-error pair cost.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Trajectory, Vec3};

fn pair_cost(a: Vec3, b: Vec3) -> f64 {
    ((a.x - b.x).abs() + (a.y - b.y).abs() + (a.z - b.z).abs()) / 3.0
}

/// Optimal warping path between two sample sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// Index pairs `(i, j)` from `(0, 0)` to `(n - 1, m - 1)`.
    pub path: Vec<(usize, usize)>,
    pub cost: f64,
}

impl Alignment {
    pub fn mean_cost(&self) -> f64 {
        self.cost / self.path.len() as f64
    }
}

/// Minimum-cost warping path. Among equal-cost paths the shortest one is
/// taken, which keeps the result symmetric in its arguments.
pub fn dtw_align(a: &[Vec3], b: &[Vec3]) -> Result<Alignment> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return Err(invalid("cannot align an empty trajectory"));
    }
    // (cost, steps) ordered lexicographically; `from` records the move
    // into each cell: 0 diagonal, 1 from above, 2 from the left
    let mut table = vec![(f64::INFINITY, usize::MAX); n * m];
    let mut from = vec![0u8; n * m];
    let at = |i: usize, j: usize| i * m + j;
    for i in 0..n {
        for j in 0..m {
            let c = pair_cost(a[i], b[j]);
            let mut best = if i == 0 && j == 0 {
                (0.0, 0)
            } else {
                (f64::INFINITY, usize::MAX)
            };
            let mut dir = 0u8;
            let candidates = [
                (i > 0 && j > 0).then(|| table[at(i - 1, j - 1)]),
                (i > 0).then(|| table[at(i - 1, j)]),
                (j > 0).then(|| table[at(i, j - 1)]),
            ];
            for (d, cand) in candidates.into_iter().enumerate() {
                if let Some(cand) = cand {
                    if cand.0 < best.0 || (cand.0 == best.0 && cand.1 < best.1) {
                        best = cand;
                        dir = d as u8;
                    }
                }
            }
            table[at(i, j)] = (best.0 + c, best.1 + 1);
            from[at(i, j)] = dir;
        }
    }

    let (cost, steps) = table[at(n - 1, m - 1)];
    let mut path = Vec::with_capacity(steps);
    let (mut i, mut j) = (n - 1, m - 1);
    path.push((i, j));
    while i > 0 || j > 0 {
        match from[at(i, j)] {
            0 => {
                i -= 1;
                j -= 1;
            }
            1 => i -= 1,
            _ => j -= 1,
        }
        path.push((i, j));
    }
    path.reverse();
    debug_assert_eq!(path.len(), steps);
    Ok(Alignment { path, cost })
}

/// Warping cost divided by the warping path length (m).
pub fn dtw_mae(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    Ok(dtw_align(a.samples(), b.samples())?.mean_cost())
}

/// Coefficient of determination of `model` against `reference`, pairing
/// samples along the warping path and pooling the three axes. Negative
/// values are clamped to zero.
pub fn r_squared(reference: &Trajectory, model: &Trajectory) -> Result<f64> {
    let alignment = dtw_align(reference.samples(), model.samples())?;
    r_squared_along(reference.samples(), model.samples(), &alignment)
}

fn r_squared_along(reference: &[Vec3], model: &[Vec3], alignment: &Alignment) -> Result<f64> {
    let count = alignment.path.len() as f64;
    let mean = alignment
        .path
        .iter()
        .fold(Vec3::ZERO, |acc, &(i, _)| acc + reference[i])
        / count;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for &(i, j) in &alignment.path {
        ss_res += (reference[i] - model[j]).norm_squared();
        ss_tot += (reference[i] - mean).norm_squared();
    }
    if ss_tot <= 0.0 {
        return Err(Error::Degenerate("reference trajectory has zero variance".into()));
    }
    Ok((1.0 - ss_res / ss_tot).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// m
    pub mae: f64,
    pub r_squared: f64,
}

/// DTW error and R^2 of `model` against `reference` from a single alignment.
pub fn fit_report(reference: &Trajectory, model: &Trajectory) -> Result<FitReport> {
    let alignment = dtw_align(reference.samples(), model.samples())?;
    Ok(FitReport {
        mae: alignment.mean_cost(),
        r_squared: r_squared_along(reference.samples(), model.samples(), &alignment)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn traj(points: &[[f64; 3]]) -> Trajectory {
        Trajectory::new(points.iter().map(|p| Vec3::from_array(*p)).collect(), 0.1).unwrap()
    }

    #[test]
    fn identical_paths_cost_nothing() {
        let t = traj(&[[0.0, 0.0, 0.0], [0.3, 0.1, 0.0], [0.5, 0.4, 0.2]]);
        assert_eq!(dtw_mae(&t, &t).unwrap(), 0.0);
        assert_eq!(r_squared(&t, &t).unwrap(), 1.0);
    }

    #[test]
    fn single_points() {
        let a = traj(&[[0.0, 1.0, 2.0]]);
        let b = traj(&[[0.6, 1.0, 2.0]]);
        assert_relative_eq!(dtw_mae(&a, &b).unwrap(), 0.2, epsilon = 1e-15);
    }

    /// Every monotone warping path, enumerated.
    fn all_paths(n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
        fn go(
            i: usize,
            j: usize,
            n: usize,
            m: usize,
            cur: &mut Vec<(usize, usize)>,
            out: &mut Vec<Vec<(usize, usize)>>,
        ) {
            cur.push((i, j));
            if i == n - 1 && j == m - 1 {
                out.push(cur.clone());
            } else {
                if i + 1 < n && j + 1 < m {
                    go(i + 1, j + 1, n, m, cur, out);
                }
                if i + 1 < n {
                    go(i + 1, j, n, m, cur, out);
                }
                if j + 1 < m {
                    go(i, j + 1, n, m, cur, out);
                }
            }
            cur.pop();
        }
        let mut out = Vec::new();
        go(0, 0, n, m, &mut Vec::new(), &mut out);
        out
    }

    fn brute_mae(a: &Trajectory, b: &Trajectory) -> f64 {
        let mut best = (f64::INFINITY, usize::MAX);
        for p in all_paths(a.len(), b.len()) {
            let c: f64 = p.iter().map(|&(i, j)| pair_cost(a.samples()[i], b.samples()[j])).sum();
            if c < best.0 || (c == best.0 && p.len() < best.1) {
                best = (c, p.len());
            }
        }
        best.0 / best.1 as f64
    }

    #[test]
    fn three_by_two_table() {
        // cheapest path (0,0) (1,0) (2,1): cost 0 + 1/3 + 1/3 over 3 cells
        let a = traj(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        let b = traj(&[[0.0, 0.0, 0.0], [3.0, 0.0, 0.0]]);
        assert_relative_eq!(dtw_mae(&a, &b).unwrap(), 2.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(brute_mae(&a, &b), 2.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn agrees_with_path_enumeration() {
        let a = traj(&[[0.0, 0.1, 0.0], [0.4, 0.2, 0.1], [0.9, -0.1, 0.0], [1.2, 0.0, 0.3]]);
        let b = traj(&[
            [0.1, 0.0, 0.0],
            [0.5, 0.3, 0.0],
            [1.0, 0.0, 0.2],
            [1.1, 0.1, 0.1],
            [1.3, 0.0, 0.0],
        ]);
        assert_relative_eq!(dtw_mae(&a, &b).unwrap(), brute_mae(&a, &b), epsilon = 1e-14);
        assert_eq!(dtw_mae(&a, &b).unwrap(), dtw_mae(&b, &a).unwrap());
    }

    #[test]
    fn constant_model_explains_nothing() {
        let r = traj(&[[0.0, 0.0, 0.0], [1.0, 2.0, 0.0], [2.0, 1.0, 1.0], [3.0, 3.0, 1.0]]);
        let mean = r.samples().iter().fold(Vec3::ZERO, |a, p| a + *p) / 4.0;
        let m = Trajectory::new(vec![mean; 4], 0.1).unwrap();
        assert_relative_eq!(r_squared(&r, &m).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn anti_correlated_model_is_clamped() {
        let r = traj(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        let m = traj(&[[8.0, 0.0, 0.0], [6.0, 0.0, 0.0], [4.0, 0.0, 0.0]]);
        assert_eq!(r_squared(&r, &m).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_and_empty_inputs() {
        let r = traj(&[[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]]);
        assert!(matches!(r_squared(&r, &r), Err(Error::Degenerate(_))));
        assert!(dtw_align(&[], &[Vec3::ZERO]).is_err());
    }
}
