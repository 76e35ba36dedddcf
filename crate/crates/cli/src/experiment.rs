//! The batch pipeline: `simulate -> segment -> analyze -> fit -> report`.
//!
//! Every stage reads what the previous one wrote under the output
//! directory, so stages can be rerun on their own. Flights are processed in
//! parallel but all files are written in seed order.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use plumenav_core::analysis::{
    ad_k_sample, axis_variance_fractions, distance_bins, exploration_fraction, fit_report, mean_std, trajectory_eer,
    EerProfile, FlightEer, VarianceMode,
};
use plumenav_core::navigator::mean_trajectory;
use plumenav_core::segmentation::{exploration_score, segment_detailed, segmentation_accuracy};
use plumenav_core::{run_flight, GaConfig, Phase, Scenario, Segmentation, VelocitySeries};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{Condition, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::io;

pub const MANIFEST: &str = "manifest.json";

/// Paths inside an output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join(MANIFEST)
    }

    pub fn condition(&self, c: Condition) -> PathBuf {
        self.root.join(c.name())
    }

    pub fn trajectory(&self, c: Condition, seed: u64) -> PathBuf {
        self.condition(c).join("flights").join(format!("{seed}.csv"))
    }

    pub fn truth(&self, c: Condition, seed: u64) -> PathBuf {
        self.condition(c).join("flights").join(format!("{seed}.truth.csv"))
    }

    pub fn segments(&self, c: Condition, seed: u64) -> PathBuf {
        self.condition(c).join("segments").join(format!("{seed}.csv"))
    }

    pub fn predicted(&self, c: Condition, seed: u64) -> PathBuf {
        self.condition(c).join("segments").join(format!("{seed}.labels.csv"))
    }

    pub fn table(&self, c: Condition, name: &str) -> PathBuf {
        self.condition(c).join(name)
    }
}

/// What was run, with enough detail to replay any flight on its own:
/// `run_flight(&scenario, seed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    /// `out_dir` is stored as `.` so the file does not depend on where the
    /// run was written.
    pub config: ExperimentConfig,
    pub conditions: Vec<ConditionRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRun {
    pub condition: Condition,
    pub scenario: Scenario,
    pub seeds: Vec<u64>,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        let mut config = cfg.clone();
        config.out_dir = PathBuf::from(".");
        let conditions = cfg
            .conditions
            .iter()
            .map(|&c| ConditionRun {
                condition: c,
                scenario: cfg.scenario_for(c),
                seeds: cfg.seeds().collect(),
            })
            .collect();
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            conditions,
        }
    }

    /// Reads `dir/manifest.json`; the config's `out_dir` becomes `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let mut m: Manifest = serde_json::from_str(&text)?;
        m.config.out_dir = dir.to_path_buf();
        m.config.validate()?;
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST);
        let mut stored = self.clone();
        stored.config.out_dir = PathBuf::from(".");
        let mut text = serde_json::to_string_pretty(&stored)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}

/// `flights.csv`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRow {
    pub seed: u64,
    pub success: bool,
    pub samples: usize,
    pub duration_s: f64,
    pub path_length_m: f64,
    /// Share of steps the navigator spent casting.
    pub true_exploration: f64,
}

/// `segmentation.csv`. Flights too short to split have empty fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationRow {
    pub seed: u64,
    pub k: Option<usize>,
    pub objective: Option<f64>,
    pub accuracy: Option<f64>,
    pub exploration_fraction: Option<f64>,
}

/// `segments/<seed>.csv`: velocity-step index ranges, end exclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRow {
    pub start: usize,
    pub end: usize,
    pub label: Phase,
    pub score: f64,
}

/// `eer_profile.csv`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub distance_m: f64,
    pub steps: u64,
    pub flights: usize,
    pub mean_fraction: Option<f64>,
    pub std_fraction: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub std_ratio: Option<f64>,
}

/// `eer_flights.csv`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightEerRow {
    pub seed: u64,
    pub eer: f64,
}

/// `fit.csv`: each held-out flight against the mean path of the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub seed: u64,
    pub mae_m: f64,
    pub r_squared: f64,
}

/// One row of the top-level `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub flights: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_accuracy: Option<f64>,
    pub mean_k: Option<f64>,
    pub mean_eer: Option<f64>,
    pub std_eer: Option<f64>,
    pub mean_mae_m: Option<f64>,
    pub mean_r_squared: Option<f64>,
    pub variance_x: Option<f64>,
    pub variance_y: Option<f64>,
    pub variance_z: Option<f64>,
}

/// Row of the top-level `eer_profile.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CombinedProfileRow {
    condition: Condition,
    distance_m: f64,
    steps: u64,
    flights: usize,
    mean_fraction: Option<f64>,
    std_fraction: Option<f64>,
    mean_ratio: Option<f64>,
    std_ratio: Option<f64>,
}

/// Row of `eer_histogram.csv`: per-flight EER counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct HistogramRow {
    condition: Condition,
    low: f64,
    high: f64,
    flights: usize,
}

/// Row of `comparison.csv`: k-sample test on the per-flight EER.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ComparisonRow {
    first: Condition,
    second: Condition,
    statistic: f64,
    normalized: f64,
    p_value: f64,
    mean_eer_difference: f64,
}

/// Runs all stages.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ConditionSummary>> {
    cfg.validate()?;
    simulate(cfg)?;
    segment_all(cfg)?;
    analyze(cfg)?;
    fit(cfg)?;
    report(cfg)
}

/// Flies every seed under every condition; writes trajectories, true
/// labels, `flights.csv` and the manifest.
pub fn simulate(cfg: &ExperimentConfig) -> Result<()> {
    cfg.validate()?;
    let layout = Layout::new(&cfg.out_dir);
    create_dir(layout.root())?;
    Manifest::new(cfg).save(layout.root())?;
    for &c in &cfg.conditions {
        create_dir(&layout.condition(c).join("flights"))?;
        let scenario = cfg.scenario_for(c);
        let seeds: Vec<u64> = cfg.seeds().collect();
        let rows = seeds
            .par_iter()
            .map(|&seed| {
                let r = run_flight(&scenario, seed)?;
                io::save_trajectory(&layout.trajectory(c, seed), &r.trajectory)?;
                io::save_labels(&layout.truth(c, seed), &r.true_labels, r.trajectory.dt(), 0)?;
                let casting = r.true_labels.iter().filter(|l| **l == Phase::Exploration).count();
                Ok(FlightRow {
                    seed,
                    success: r.success,
                    samples: r.trajectory.len(),
                    duration_s: r.trajectory.duration(),
                    path_length_m: r.trajectory.arc_length(),
                    true_exploration: casting as f64 / r.true_labels.len() as f64,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        write_table(&layout.table(c, "flights.csv"), &rows)?;
    }
    Ok(())
}

/// Segments every simulated flight and scores it against the true labels.
pub fn segment_all(cfg: &ExperimentConfig) -> Result<()> {
    let layout = Layout::new(&cfg.out_dir);
    for &c in &cfg.conditions {
        create_dir(&layout.condition(c).join("segments"))?;
        let flights: Vec<FlightRow> = read_table(&layout.table(c, "flights.csv"))?;
        let rows = flights
            .par_iter()
            .map(|f| segment_flight(&layout, c, f, &flight_ga(&cfg.ga, f.seed)))
            .collect::<Result<Vec<_>>>()?;
        write_table(&layout.table(c, "segmentation.csv"), &rows)?;
    }
    Ok(())
}

/// GA settings for one flight: the configured seed mixed with the flight
/// seed, so flights do not share a random stream.
pub fn flight_ga(ga: &GaConfig, flight_seed: u64) -> GaConfig {
    GaConfig {
        seed: ga.seed ^ flight_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        ..ga.clone()
    }
}

fn segment_flight(layout: &Layout, c: Condition, flight: &FlightRow, ga: &GaConfig) -> Result<SegmentationRow> {
    let seed = flight.seed;
    if flight.samples.saturating_sub(4) < 2 * ga.min_segment_length {
        write_table::<SegmentRow>(&layout.segments(c, seed), &[])?;
        io::save_labels(&layout.predicted(c, seed), &[], 1.0, VelocitySeries::OFFSET)?;
        return Ok(SegmentationRow {
            seed,
            k: None,
            objective: None,
            accuracy: None,
            exploration_fraction: None,
        });
    }
    let traj = io::read_trajectory(&layout.trajectory(c, seed))?;
    let truth = io::read_labels(&layout.truth(c, seed))?.labels;
    let report = segment_detailed(&traj, ga)?;
    let seg = &report.segmentation;
    let predicted = seg.step_labels();
    write_table(&layout.segments(c, seed), &segment_rows(seg, &report.velocity)?)?;
    io::save_labels(
        &layout.predicted(c, seed),
        &predicted,
        traj.dt(),
        VelocitySeries::OFFSET,
    )?;
    let off = VelocitySeries::OFFSET;
    let accuracy = segmentation_accuracy(&predicted, &truth[off..off + predicted.len()])?;
    let objective = plumenav_core::segmentation::objective(&report.velocity, seg, ga.label_convention)?;
    Ok(SegmentationRow {
        seed,
        k: Some(seg.k()),
        objective: Some(objective),
        accuracy: Some(accuracy),
        exploration_fraction: Some(exploration_fraction(seg)),
    })
}

pub fn segment_rows(seg: &Segmentation, vel: &VelocitySeries) -> Result<Vec<SegmentRow>> {
    seg.segments()
        .map(|(start, end, label)| {
            Ok(SegmentRow {
                start,
                end,
                label,
                score: exploration_score(vel, start, end)?,
            })
        })
        .collect()
}

/// Rebuilds a segmentation from per-step labels.
pub fn segmentation_from_labels(labels: &[Phase]) -> Result<Segmentation> {
    let first = *labels
        .first()
        .ok_or_else(|| CliError::Config("cannot rebuild a segmentation from no labels".into()))?;
    let boundaries = (1..labels.len()).filter(|&i| labels[i] != labels[i - 1]).collect();
    Ok(Segmentation::alternating(boundaries, first, labels.len())?)
}

/// Exploration-rate profile over distance to the source, from successful
/// segmented flights.
pub fn analyze(cfg: &ExperimentConfig) -> Result<()> {
    let layout = Layout::new(&cfg.out_dir);
    let a = &cfg.analysis;
    for &c in &cfg.conditions {
        let source = cfg.scenario_for(c).plume.source_position;
        let seeds = usable_seeds(&layout, c)?;
        let per_flight = seeds
            .par_iter()
            .map(|&seed| {
                let traj = io::read_trajectory(&layout.trajectory(c, seed))?;
                let labels = io::read_labels(&layout.predicted(c, seed))?.labels;
                let seg = segmentation_from_labels(&labels)?;
                let eer = trajectory_eer(&traj, &seg, source, a.bin_radius, a.max_distance)?;
                Ok((
                    FlightEerRow {
                        seed,
                        eer: exploration_fraction(&seg),
                    },
                    eer,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let (flight_rows, eers): (Vec<FlightEerRow>, Vec<FlightEer>) = per_flight.into_iter().unzip();
        write_table(&layout.table(c, "eer_flights.csv"), &flight_rows)?;
        write_table(
            &layout.table(c, "eer_profile.csv"),
            &profile_rows(&eers, a.bin_radius, a.max_distance)?,
        )?;
    }
    Ok(())
}

fn profile_rows(eers: &[FlightEer], bin_radius: f64, max_distance: f64) -> Result<Vec<ProfileRow>> {
    if eers.is_empty() {
        return Ok(distance_bins(bin_radius, max_distance)
            .into_iter()
            .map(|d| ProfileRow {
                distance_m: d,
                steps: 0,
                flights: 0,
                mean_fraction: None,
                std_fraction: None,
                mean_ratio: None,
                std_ratio: None,
            })
            .collect());
    }
    let p = EerProfile::aggregate(eers)?;
    Ok((0..p.bin_centers.len())
        .map(|b| ProfileRow {
            distance_m: p.bin_centers[b],
            steps: p.counts[b],
            flights: p.flights[b],
            mean_fraction: p.mean_fraction[b],
            std_fraction: p.std_fraction[b],
            mean_ratio: p.mean_ratio[b],
            std_ratio: p.std_ratio[b],
        })
        .collect())
}

// successful flights that were segmented, in seed order
fn usable_seeds(layout: &Layout, c: Condition) -> Result<Vec<u64>> {
    let flights: Vec<FlightRow> = read_table(&layout.table(c, "flights.csv"))?;
    let segmented: Vec<SegmentationRow> = read_table(&layout.table(c, "segmentation.csv"))?;
    Ok(flights
        .iter()
        .zip(&segmented)
        .filter(|(f, s)| f.success && s.k.is_some())
        .map(|(f, _)| f.seed)
        .collect())
}

/// Mean path of the successful flights, checked against held-out ones.
///
/// The last `holdout_runs` successful flights (fewer if there are not
/// enough) are held out; the mean path of the rest is written to
/// `mean_path.csv`.
pub fn fit(cfg: &ExperimentConfig) -> Result<()> {
    let layout = Layout::new(&cfg.out_dir);
    for &c in &cfg.conditions {
        let flights: Vec<FlightRow> = read_table(&layout.table(c, "flights.csv"))?;
        let seeds: Vec<u64> = flights
            .iter()
            .filter(|f| f.success && f.samples >= 2)
            .map(|f| f.seed)
            .collect();
        let mut rows = Vec::new();
        if seeds.len() >= 2 {
            let holdout = cfg.analysis.holdout_runs.min(seeds.len() - 1);
            let (train, test) = seeds.split_at(seeds.len() - holdout);
            let train = train
                .par_iter()
                .map(|&s| io::read_trajectory(&layout.trajectory(c, s)))
                .collect::<Result<Vec<_>>>()?;
            let mean = mean_trajectory(&train.iter().collect::<Vec<_>>())?;
            io::save_trajectory(&layout.table(c, "mean_path.csv"), &mean)?;
            rows = test
                .par_iter()
                .map(|&seed| {
                    let reference = io::read_trajectory(&layout.trajectory(c, seed))?;
                    let r = fit_report(&reference, &mean)?;
                    Ok(FitRow {
                        seed,
                        mae_m: r.mae,
                        r_squared: r.r_squared,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
        }
        write_table(&layout.table(c, "fit.csv"), &rows)?;
    }
    Ok(())
}

/// Collects the per-condition tables into `summary.csv`,
/// `eer_profile.csv`, `eer_histogram.csv` and, with two or more
/// conditions, `comparison.csv`.
pub fn report(cfg: &ExperimentConfig) -> Result<Vec<ConditionSummary>> {
    let layout = Layout::new(&cfg.out_dir);
    let mut summaries = Vec::new();
    let mut profiles = Vec::new();
    let mut histogram = Vec::new();
    let mut eer_samples: Vec<(Condition, Vec<f64>)> = Vec::new();
    for &c in &cfg.conditions {
        let flights: Vec<FlightRow> = read_table(&layout.table(c, "flights.csv"))?;
        let segmented: Vec<SegmentationRow> = read_table(&layout.table(c, "segmentation.csv"))?;
        let eers: Vec<FlightEerRow> = read_table(&layout.table(c, "eer_flights.csv"))?;
        let fits: Vec<FitRow> = read_table(&layout.table(c, "fit.csv"))?;
        let profile: Vec<ProfileRow> = read_table(&layout.table(c, "eer_profile.csv"))?;

        let successes = flights.iter().filter(|f| f.success).count();
        let accuracy: Vec<f64> = segmented.iter().filter_map(|s| s.accuracy).collect();
        let ks: Vec<f64> = segmented.iter().filter_map(|s| s.k.map(|k| k as f64)).collect();
        let eer: Vec<f64> = eers.iter().map(|e| e.eer).collect();
        let maes: Vec<f64> = fits.iter().map(|f| f.mae_m).collect();
        let r2: Vec<f64> = fits.iter().map(|f| f.r_squared).collect();

        let successful = flights
            .iter()
            .filter(|f| f.success && f.samples >= 2)
            .map(|f| f.seed)
            .collect::<Vec<_>>();
        let trajs = successful
            .par_iter()
            .map(|&s| io::read_trajectory(&layout.trajectory(c, s)))
            .collect::<Result<Vec<_>>>()?;
        let variance = axis_variance_fractions(&trajs.iter().collect::<Vec<_>>(), VarianceMode::PerAxis).ok();

        summaries.push(ConditionSummary {
            condition: c,
            flights: flights.len(),
            successes,
            success_rate: successes as f64 / flights.len().max(1) as f64,
            mean_accuracy: mean_std(&accuracy).map(|m| m.0),
            mean_k: mean_std(&ks).map(|m| m.0),
            mean_eer: mean_std(&eer).map(|m| m.0),
            std_eer: mean_std(&eer).map(|m| m.1),
            mean_mae_m: mean_std(&maes).map(|m| m.0),
            mean_r_squared: mean_std(&r2).map(|m| m.0),
            variance_x: variance.map(|v| v[0]),
            variance_y: variance.map(|v| v[1]),
            variance_z: variance.map(|v| v[2]),
        });
        profiles.extend(profile.into_iter().map(|r| CombinedProfileRow {
            condition: c,
            distance_m: r.distance_m,
            steps: r.steps,
            flights: r.flights,
            mean_fraction: r.mean_fraction,
            std_fraction: r.std_fraction,
            mean_ratio: r.mean_ratio,
            std_ratio: r.std_ratio,
        }));
        histogram.extend(eer_histogram(c, &eer, cfg.analysis.histogram_width));
        eer_samples.push((c, eer));
    }

    write_table(&layout.root().join("summary.csv"), &summaries)?;
    write_table(&layout.root().join("eer_profile.csv"), &profiles)?;
    write_table(&layout.root().join("eer_histogram.csv"), &histogram)?;
    if eer_samples.len() >= 2 {
        let mut rows = Vec::new();
        for (i, (a, xa)) in eer_samples.iter().enumerate() {
            for (b, xb) in &eer_samples[i + 1..] {
                // the test needs a few values in each sample and some spread
                let Ok(ad) = ad_k_sample(&[xa, xb]) else { continue };
                let (Some((ma, _)), Some((mb, _))) = (mean_std(xa), mean_std(xb)) else {
                    continue;
                };
                rows.push(ComparisonRow {
                    first: *a,
                    second: *b,
                    statistic: ad.statistic,
                    normalized: ad.normalized,
                    p_value: ad.p_value,
                    mean_eer_difference: mb - ma,
                });
            }
        }
        write_table(&layout.root().join("comparison.csv"), &rows)?;
    }
    Ok(summaries)
}

fn eer_histogram(c: Condition, eer: &[f64], width: f64) -> Vec<HistogramRow> {
    let bins = (1.0 / width).ceil() as usize;
    let mut counts = vec![0usize; bins];
    for &e in eer {
        counts[((e / width) as usize).min(bins - 1)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, flights)| HistogramRow {
            condition: c,
            low: i as f64 * width,
            high: ((i + 1) as f64 * width).min(1.0),
            flights,
        })
        .collect()
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn write_table<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_rows(BufWriter::new(file), rows, path)
}

pub fn write_rows<T: Serialize, W: Write>(out: W, rows: &[T], origin: &Path) -> Result<()> {
    let err = |e| CliError::csv(origin.display(), e);
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(err)?;
    }
    w.flush().map_err(|e| err(e.into()))
}

pub fn read_table<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| CliError::csv(path.display(), e))
}
