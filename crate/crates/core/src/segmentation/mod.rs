//! Exploration/exploitation segmentation of flight trajectories.
//!
//! A trajectory's stencil velocities are divided into `k` consecutive
//! segments with strictly alternating phase labels. Exploitation segments
//! contribute their exploration score positively and exploration segments
//! negatively; the division maximizing that sum is searched with a genetic
//! algorithm for every `k` up to a bound, and `k` is picked at the elbow of
//! the best-objective curve.

mod brute;
mod elbow;
mod ga;
mod score;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use brute::{brute_force_segment, count_placements, Exhaustive, MAX_PLACEMENTS};
pub use elbow::elbow_select;
pub use ga::{
    crossover, ga_optimize, mutate, next_generation, random_individual, repair, selection_probabilities, GaResult,
    Individual,
};
pub use score::{exploration_score, SegmentScorer};

use crate::error::{invalid, Error, Result};
use crate::geometry::{velocity_profile, Trajectory, VelocitySeries};
use crate::phase::Phase;

/// Which phase collects the positive score in the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelConvention {
    /// Exploitation segments count positively.
    #[default]
    RewardExploitation,
    /// Exploration segments count positively.
    RewardExploration,
}

impl LabelConvention {
    fn sign(self, phase: Phase) -> f64 {
        match (self, phase) {
            (LabelConvention::RewardExploitation, Phase::Exploitation)
            | (LabelConvention::RewardExploration, Phase::Exploration) => 1.0,
            _ => -1.0,
        }
    }

    /// Phase that gets the positive sign.
    pub fn rewarded(self) -> Phase {
        match self {
            LabelConvention::RewardExploitation => Phase::Exploitation,
            LabelConvention::RewardExploration => Phase::Exploration,
        }
    }

    /// First label of an alternating division whose alternating score sum
    /// `score_0 - score_1 + ...` equals `alternating`. Ties go to the
    /// penalized phase.
    pub fn first_label(self, alternating: f64) -> Phase {
        if alternating > 0.0 {
            self.rewarded()
        } else {
            self.rewarded().other()
        }
    }
}

/// Genetic-algorithm and pipeline settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    /// Fraction of the population kept unchanged each generation.
    pub elite_fraction: f64,
    pub generations: usize,
    /// Largest number of segments tried.
    pub max_segments: usize,
    pub min_segment_length: usize,
    /// Probability that an individual spawns a mutated copy per generation.
    pub mutation_rate: f64,
    /// Probability that a parent pair spawns two crossover children.
    pub crossover_rate: f64,
    pub label_convention: LabelConvention,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            elite_fraction: 0.1,
            generations: 200,
            max_segments: 12,
            min_segment_length: 5,
            mutation_rate: 1.0,
            crossover_rate: 0.5,
            label_convention: LabelConvention::RewardExploitation,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 10 {
            return Err(Error::Config("population_size must be >= 10".into()));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(Error::Config("elite_fraction must lie in (0, 1)".into()));
        }
        if self.generations < 1 {
            return Err(Error::Config("generations must be >= 1".into()));
        }
        if self.max_segments < 2 {
            return Err(Error::Config("max_segments must be >= 2".into()));
        }
        if self.min_segment_length < 2 {
            return Err(Error::Config("min_segment_length must be >= 2".into()));
        }
        for (name, p) in [
            ("mutation_rate", self.mutation_rate),
            ("crossover_rate", self.crossover_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// A division of a velocity series into alternately labelled segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    /// Start index of every segment after the first.
    pub boundaries: Vec<usize>,
    pub labels: Vec<Phase>,
    /// Length of the segmented velocity series.
    pub len: usize,
}

impl Segmentation {
    /// Builds an alternating segmentation starting with `first`.
    pub fn alternating(boundaries: Vec<usize>, first: Phase, len: usize) -> Result<Self> {
        let labels = (0..=boundaries.len())
            .map(|i| if i % 2 == 0 { first } else { first.other() })
            .collect();
        let seg = Self {
            boundaries,
            labels,
            len,
        };
        seg.check(1)?;
        Ok(seg)
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    /// Validates ordering, alternation and minimum segment length.
    pub fn check(&self, min_len: usize) -> Result<()> {
        if self.labels.len() != self.boundaries.len() + 1 {
            return Err(invalid("need exactly one more label than boundaries"));
        }
        if self.labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("consecutive segments must alternate phase"));
        }
        let min_len = min_len.max(1);
        let mut start = 0;
        for &b in self.boundaries.iter().chain(std::iter::once(&self.len)) {
            if b < start + min_len {
                return Err(invalid(format!(
                    "segment [{start}, {b}) is shorter than {min_len} or out of order"
                )));
            }
            start = b;
        }
        Ok(())
    }

    /// `(start, end, label)` for each segment.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize, Phase)> + '_ {
        let starts = std::iter::once(0).chain(self.boundaries.iter().copied());
        let ends = self.boundaries.iter().copied().chain(std::iter::once(self.len));
        starts
            .zip(ends)
            .zip(self.labels.iter().copied())
            .map(|((s, e), l)| (s, e, l))
    }

    /// One label per velocity sample.
    pub fn step_labels(&self) -> Vec<Phase> {
        let mut out = Vec::with_capacity(self.len);
        for (s, e, l) in self.segments() {
            out.extend(std::iter::repeat_n(l, e - s));
        }
        out
    }
}

/// Signed sum of segment exploration scores.
pub fn objective(vel: &VelocitySeries, seg: &Segmentation, convention: LabelConvention) -> Result<f64> {
    if seg.len != vel.len() {
        return Err(Error::LengthMismatch {
            left: seg.len,
            right: vel.len(),
        });
    }
    seg.check(1)?;
    seg.segments().try_fold(0.0, |acc, (s, e, l)| {
        Ok(acc + convention.sign(l) * exploration_score(vel, s, e)?)
    })
}

/// Fraction of steps whose predicted phase matches the truth.
pub fn segmentation_accuracy(predicted: &[Phase], truth: &[Phase]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Err(invalid("no labels to compare"));
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// Result of the full segmentation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub segmentation: Segmentation,
    /// Best objective found for each `k`, starting at `k = 2`.
    pub scores: Vec<(usize, f64)>,
    pub velocity: VelocitySeries,
}

/// Segments the velocity series of a trajectory.
pub fn segment(traj: &Trajectory, cfg: &GaConfig) -> Result<Segmentation> {
    segment_detailed(traj, cfg).map(|r| r.segmentation)
}

/// Like [`segment`], also returning the per-`k` scores and velocities.
pub fn segment_detailed(traj: &Trajectory, cfg: &GaConfig) -> Result<SegmentReport> {
    let vel = velocity_profile(traj)?;
    let (segmentation, scores) = segment_velocity(&vel, cfg)?;
    Ok(SegmentReport {
        segmentation,
        scores,
        velocity: vel,
    })
}

/// Pipeline on a precomputed velocity series: GA for each feasible `k`,
/// elbow choice of `k`, then phase labelling.
pub fn segment_velocity(vel: &VelocitySeries, cfg: &GaConfig) -> Result<(Segmentation, Vec<(usize, f64)>)> {
    cfg.validate()?;
    let n = vel.len();
    let m = cfg.min_segment_length;
    let k_max = cfg.max_segments.min(n / m).min(n.saturating_sub(1));
    if k_max < 2 {
        return Err(Error::Infeasible {
            segments: 2,
            min_len: m,
            len: n,
        });
    }

    let runs: Vec<GaResult> = (2..=k_max)
        .into_par_iter()
        .map(|k| ga_optimize(vel, k, cfg))
        .collect::<Result<_>>()?;
    let scores: Vec<(usize, f64)> = runs.iter().map(|r| (r.k, r.best.fitness)).collect();
    let chosen = elbow_select(&scores);
    let best = &runs[chosen - 2].best;

    let scorer = SegmentScorer::new(vel);
    let first = cfg.label_convention.first_label(scorer.alternating_sum(&best.indices));
    let seg = Segmentation::alternating(best.indices.clone(), first, n)?;
    Ok((seg, scores))
}
