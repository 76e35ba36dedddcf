//! Rank statistics, variance shares and the k-sample Anderson-Darling test.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Trajectory, Vec3};

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

/// 1-based ranks with ties averaged.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            out[o] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(invalid("correlation needs at least two pairs"));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("constant input has no rank correlation".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceMode {
    /// Variance share of each tunnel axis, in x, y, z order.
    #[default]
    PerAxis,
    /// Eigenvalue shares of the covariance matrix, largest first.
    Principal,
}

fn pooled_covariance(trajectories: &[&Trajectory]) -> Result<Matrix3<f64>> {
    let count: usize = trajectories.iter().map(|t| t.len()).sum();
    if count < 2 {
        return Err(invalid("variance needs at least two samples"));
    }
    let points = || trajectories.iter().flat_map(|t| t.samples().iter().copied());
    let mean = points().fold(Vec3::ZERO, |a, p| a + p) / count as f64;
    let mut cov = Matrix3::zeros();
    for p in points() {
        let d = p - mean;
        let v = nalgebra::Vector3::new(d.x, d.y, d.z);
        cov += v * v.transpose();
    }
    let cov = cov / count as f64;
    if cov.trace() <= 0.0 {
        return Err(Error::Degenerate("all samples coincide".into()));
    }
    Ok(cov)
}

/// Shares of the total positional variance, pooled over all samples.
pub fn axis_variance_fractions(trajectories: &[&Trajectory], mode: VarianceMode) -> Result<[f64; 3]> {
    match mode {
        VarianceMode::PerAxis => {
            let cov = pooled_covariance(trajectories)?;
            let diag = [cov[(0, 0)], cov[(1, 1)], cov[(2, 2)]];
            let total: f64 = diag.iter().sum();
            Ok(diag.map(|v| v / total))
        }
        VarianceMode::Principal => principal_variance_fractions(trajectories),
    }
}

/// Eigenvalue shares of the pooled covariance, largest first.
pub fn principal_variance_fractions(trajectories: &[&Trajectory]) -> Result<[f64; 3]> {
    let cov = pooled_covariance(trajectories)?;
    let eig = SymmetricEigen::new(cov);
    let mut values: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = values.iter().sum();
    Ok([values[0] / total, values[1] / total, values[2] / total])
}

/// k-sample Anderson-Darling result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AndersonDarling {
    /// Tie-corrected statistic `A2akN`.
    pub statistic: f64,
    /// `(A2akN - (k - 1)) / sigma_N`.
    pub normalized: f64,
    /// Approximate p-value.
    pub p_value: f64,
}

const SIGNIFICANCE: [f64; 7] = [0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001];
const B0: [f64; 7] = [0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085];
const B1: [f64; 7] = [-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615];
const B2: [f64; 7] = [-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154];

/// Rank-based k-sample Anderson-Darling test (Scholz and Stephens, midrank
/// form for ties).
///
/// The p-value interpolates the tabulated critical values with a quadratic
/// in `ln p`. Beyond the largest tabulated value `ln p` is continued
/// linearly along the last table secant, so very small p-values are rough
/// orders of magnitude only.
pub fn ad_k_sample(samples: &[&[f64]]) -> Result<AndersonDarling> {
    let k = samples.len();
    if k < 2 {
        return Err(invalid("Anderson-Darling needs at least two samples"));
    }
    if let Some(s) = samples.iter().find(|s| s.len() < 5) {
        return Err(invalid(format!("each sample needs >= 5 values, got {}", s.len())));
    }
    if samples.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
        return Err(invalid("samples must be finite"));
    }

    let mut pooled: Vec<f64> = samples.iter().flat_map(|s| s.iter().copied()).collect();
    pooled.sort_by(f64::total_cmp);
    let mut distinct = pooled.clone();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Degenerate("all observations are equal".into()));
    }
    let big_n = pooled.len() as f64;

    let lower = |v: &[f64], z: f64| v.partition_point(|x| *x < z) as f64;
    let upper = |v: &[f64], z: f64| v.partition_point(|x| *x <= z) as f64;

    let mut statistic = 0.0;
    let sorted: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| {
            let mut v = s.to_vec();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    for s in &sorted {
        let n_i = s.len() as f64;
        let mut inner = 0.0;
        for &z in &distinct {
            let left = lower(&pooled, z);
            let l_j = upper(&pooled, z) - left;
            let b_j = left + l_j / 2.0;
            let f_ij = upper(s, z) - lower(s, z);
            let m_ij = upper(s, z) - f_ij / 2.0;
            let denom = b_j * (big_n - b_j) - big_n * l_j / 4.0;
            inner += l_j / big_n * (big_n * m_ij - b_j * n_i).powi(2) / denom;
        }
        statistic += inner / n_i;
    }
    statistic *= (big_n - 1.0) / big_n;

    let kf = k as f64;
    let h_cap: f64 = samples.iter().map(|s| 1.0 / s.len() as f64).sum();
    let n_int = pooled.len();
    // hs[t] = sum_{u=0..=t} 1 / (N - 1 - u) for t = 0..N-3
    let mut h_small = 0.0;
    let mut g = 0.0;
    let mut cum = 0.0;
    for t in 0..n_int.saturating_sub(2) {
        cum += 1.0 / (n_int - 1 - t) as f64;
        g += cum / (t + 2) as f64;
    }
    h_small += cum + 1.0;
    let h = h_small;
    let a = (4.0 * g - 6.0) * (kf - 1.0) + (10.0 - 6.0 * g) * h_cap;
    let b = (2.0 * g - 4.0) * kf * kf + 8.0 * h * kf + (2.0 * g - 14.0 * h - 4.0) * h_cap - 8.0 * h + 4.0 * g - 6.0;
    let c = (6.0 * h + 2.0 * g - 2.0) * kf * kf + (4.0 * h - 4.0 * g + 6.0) * kf + (2.0 * h - 6.0) * h_cap + 4.0 * h;
    let d = (2.0 * h + 6.0) * kf * kf - 4.0 * h * kf;
    let sigma_sq =
        (a * big_n.powi(3) + b * big_n.powi(2) + c * big_n + d) / ((big_n - 1.0) * (big_n - 2.0) * (big_n - 3.0));
    let m = kf - 1.0;
    let normalized = (statistic - m) / sigma_sq.sqrt();

    Ok(AndersonDarling {
        statistic,
        normalized,
        p_value: p_value(normalized, m),
    })
}

fn p_value(normalized: f64, m: f64) -> f64 {
    let critical: Vec<f64> = (0..7).map(|i| B0[i] + B1[i] / m.sqrt() + B2[i] / m).collect();
    let log_sig: Vec<f64> = SIGNIFICANCE.iter().map(|s| s.ln()).collect();
    let last = critical.len() - 1;
    let log_p = if normalized > critical[last] {
        let slope = (log_sig[last] - log_sig[last - 1]) / (critical[last] - critical[last - 1]);
        log_sig[last] + slope * (normalized - critical[last])
    } else {
        let coef = quadratic_fit(&critical, &log_sig);
        coef[0] + coef[1] * normalized + coef[2] * normalized * normalized
    };
    log_p.exp().clamp(0.0, 1.0)
}

/// Least-squares `c0 + c1 x + c2 x^2`.
fn quadratic_fit(x: &[f64], y: &[f64]) -> [f64; 3] {
    let design = DMatrix::from_fn(x.len(), 3, |r, c| x[r].powi(c as i32));
    let rhs = DVector::from_column_slice(y);
    let sol = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("well-conditioned table fit");
    [sol[0], sol[1], sol[2]]
}
