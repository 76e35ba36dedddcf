//! End-to-end acceptance checks. Runs with its own harness and prints one
//! PASS/FAIL line per criterion; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use plumenav_cli::config::experiment_ga_defaults;
use plumenav_cli::experiment::flight_ga;
use plumenav_cli::{run_experiment, Condition, ExperimentConfig};
use plumenav_core::analysis::{
    ad_k_sample, axis_variance_fractions, dtw_align, dtw_mae, exploration_fraction, mean_std, r_squared, spearman,
    trajectory_eer, EerProfile, FlightEer, VarianceMode,
};
use plumenav_core::navigator::mean_trajectory;
use plumenav_core::segmentation::{
    brute_force_segment, exploration_score, ga_optimize, segmentation_accuracy, GaConfig,
};
use plumenav_core::{
    run_flight, segment, velocity_profile, Phase, Scenario, Segmentation, Trajectory, Vec3, VelocitySeries,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

const BIN_RADIUS: f64 = 0.06;
const MAX_DISTANCE: f64 = 2.0;
const NEAR_FIELD: f64 = 0.6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Flight {
    success: bool,
    trajectory: Trajectory,
    truth: Vec<Phase>,
    seg: Segmentation,
}

fn fly_and_segment(scenario: &Scenario, seeds: std::ops::Range<u64>, ga: &GaConfig) -> Vec<Flight> {
    seeds
        .into_par_iter()
        .map(|seed| {
            let r = run_flight(scenario, seed).expect("flight");
            let seg = segment(&r.trajectory, &flight_ga(ga, seed)).expect("segmentation");
            Flight {
                success: r.success,
                trajectory: r.trajectory,
                truth: r.true_labels,
                seg,
            }
        })
        .collect()
}

fn scenario(cfg: &ExperimentConfig, c: Condition) -> Scenario {
    cfg.scenario_for(c)
}

fn profile(flights: &[Flight], source: Vec3) -> EerProfile {
    let eers: Vec<FlightEer> = flights
        .iter()
        .filter(|f| f.success)
        .map(|f| trajectory_eer(&f.trajectory, &f.seg, source, BIN_RADIUS, MAX_DISTANCE).unwrap())
        .collect();
    EerProfile::aggregate(&eers).unwrap()
}

fn random_series(rng: &mut ChaCha8Rng, n: usize) -> VelocitySeries {
    // piecewise regimes of different spread, so optima are not flat
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        let run = rng.random_range(3..=12);
        let spread = rng.random_range(0.01..2.0);
        let drift = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0);
        for _ in 0..run.min(n - values.len()) {
            let g = |r: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(r) };
            values.push(drift + Vec3::new(g(rng), g(rng), g(rng)) * spread);
        }
    }
    VelocitySeries::new(values)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let (mut matched, mut better) = (0, 0);
    for trial in 0..100u64 {
        let n = rng.random_range(12..=40);
        let k = rng.random_range(2..=4);
        let m = rng.random_range(2..=(n / k).min(5));
        let vel = random_series(&mut rng, n);
        let cfg = GaConfig {
            min_segment_length: m,
            seed: trial,
            ..GaConfig::default()
        };
        let ga = ga_optimize(&vel, k, &cfg).unwrap().best.fitness;
        let exact = brute_force_segment(&vel, k, m, cfg.label_convention).unwrap().objective;
        let tol = 1e-12 * exact.abs().max(1.0);
        if ga > exact + tol {
            better += 1;
        } else if ga >= exact - tol {
            matched += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        matched >= 95 && better == 0 && elapsed < Duration::from_secs(60),
        format!(
            "GA reached the exhaustive optimum in {matched}/100, beat it in {better}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2(flights: &[Flight], elapsed: Duration) -> Outcome {
    let acc: Vec<f64> = flights
        .iter()
        .map(|f| {
            let pred = f.seg.step_labels();
            let off = VelocitySeries::OFFSET;
            segmentation_accuracy(&pred, &f.truth[off..off + pred.len()]).unwrap()
        })
        .collect();
    let mean = mean_std(&acc).unwrap().0;
    outcome(
        flights.len() >= 1000 && mean >= 0.80 && elapsed < Duration::from_secs(15 * 60),
        format!(
            "mean accuracy {mean:.4} over {} flights, {:.0} s",
            flights.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3(flights: &[Flight], source: Vec3) -> Outcome {
    let p = profile(flights, source);
    let (d, e): (Vec<f64>, Vec<f64>) = (0..p.bin_centers.len())
        .filter(|&b| p.counts[b] >= 30)
        .filter_map(|b| p.mean_fraction[b].map(|m| (p.bin_centers[b], m)))
        .unzip();
    let rho = spearman(&d, &e).unwrap();
    outcome(
        flights.len() >= 500 && rho >= 0.8,
        format!("Spearman {rho:.3} over {} bins from {} flights", d.len(), flights.len()),
    )
}

fn criterion_4(cfg: &ExperimentConfig) -> Outcome {
    let ga = experiment_ga_defaults();
    let calm = scenario(cfg, Condition::Undisturbed);
    let rough = scenario(cfg, Condition::Disturbed);
    let source = calm.plume.source_position;
    let (mut wins, mut all_calm, mut all_rough) = (0, Vec::new(), Vec::new());
    let mut diffs = Vec::new();
    for rep in 0..20u64 {
        let seeds = 10_000 + rep * 200..10_000 + (rep + 1) * 200;
        let a = fly_and_segment(&calm, seeds.clone(), &ga);
        let b = fly_and_segment(&rough, seeds, &ga);
        let mean = |fs: &[Flight]| {
            mean_std(&fs.iter().map(|f| exploration_fraction(&f.seg)).collect::<Vec<_>>())
                .unwrap()
                .0
        };
        let (ma, mb) = (mean(&a), mean(&b));
        diffs.push(mb - ma);
        if mb > ma {
            wins += 1;
        }
        all_calm.extend(a);
        all_rough.extend(b);
    }
    let (pa, pb) = (profile(&all_calm, source), profile(&all_rough, source));
    let (mut near, mut far) = (Vec::new(), Vec::new());
    for b in 0..pa.bin_centers.len() {
        if pa.counts[b] < 30 || pb.counts[b] < 30 {
            continue;
        }
        let (Some(x), Some(y)) = (pa.mean_fraction[b], pb.mean_fraction[b]) else {
            continue;
        };
        if pa.bin_centers[b] < NEAR_FIELD {
            near.push(y - x)
        } else {
            far.push(y - x)
        }
    }
    let near_gap = mean_std(&near).map_or(f64::NAN, |m| m.0);
    let far_gap = mean_std(&far).map_or(f64::NAN, |m| m.0);
    let mean_diff = mean_std(&diffs).unwrap().0;
    outcome(
        wins >= 19 && near_gap > far_gap,
        format!(
            "disturbed EER higher in {wins}/20 paired runs (mean +{mean_diff:.3}); bin gap near {near_gap:.3} vs far {far_gap:.3}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut worst_stencil: f64 = 0.0;
    let dt = 1.0 / 75.0;
    for degree in 0..=4 {
        let coeff: Vec<[f64; 3]> = (0..=degree)
            .map(|j| [1.0 + j as f64, 0.5 - 0.3 * j as f64, -2.0 + 0.7 * j as f64])
            .collect();
        let eval = |t: f64, axis: usize| coeff.iter().rev().fold(0.0, |acc, c| acc * t + c[axis]);
        let deriv = |t: f64, axis: usize| {
            coeff
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| j as f64 * c[axis] * t.powi(j as i32 - 1))
                .sum::<f64>()
        };
        let n = 60;
        let samples = (0..n).map(|i| {
            let t = -0.4 + i as f64 * dt;
            Vec3::new(eval(t, 0), eval(t, 1), eval(t, 2))
        });
        let traj = Trajectory::new(samples.collect(), dt).unwrap();
        let v = velocity_profile(&traj).unwrap();
        let exact: Vec<Vec3> = (0..v.len())
            .map(|i| {
                let t = -0.4 + (i + VelocitySeries::OFFSET) as f64 * dt;
                Vec3::new(deriv(t, 0), deriv(t, 1), deriv(t, 2))
            })
            .collect();
        let scale = exact.iter().map(|e| e.norm()).fold(0.0, f64::max);
        for (got, want) in v.values.iter().zip(&exact) {
            let err = (*got - *want).norm();
            let rel = if scale > 0.0 { err / scale } else { err };
            worst_stencil = worst_stencil.max(rel);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    let vel = random_series(&mut rng, 40);
    let base = exploration_score(&vel, 3, 31).unwrap();
    let mut worst_scale: f64 = 0.0;
    for lambda in [-3.5, -1.0, 1e-3, 0.25, 2.0, 17.0] {
        let scaled = exploration_score(&vel.scaled(lambda), 3, 31).unwrap();
        worst_scale = worst_scale.max((scaled - lambda.abs() * base).abs() / (lambda.abs() * base));
    }

    let a = Trajectory::new(
        (0..30)
            .map(|i| Vec3::new(i as f64 * 0.1, (i as f64).sin(), 0.2))
            .collect(),
        dt,
    )
    .unwrap();
    let b = Trajectory::new(
        (0..22)
            .map(|i| Vec3::new(i as f64 * 0.13, (i as f64 * 0.7).cos(), 0.0))
            .collect(),
        dt,
    )
    .unwrap();
    let dtw_self = dtw_mae(&a, &a).unwrap() == 0.0;
    let dtw_sym =
        dtw_align(a.samples(), b.samples()).unwrap().cost == dtw_align(b.samples(), a.samples()).unwrap().cost;
    let r2_self = r_squared(&a, &a).unwrap() == 1.0;
    let labels: Vec<Phase> = (0..50)
        .map(|i| {
            if (i / 7) % 2 == 0 {
                Phase::Exploration
            } else {
                Phase::Exploitation
            }
        })
        .collect();
    let flipped: Vec<Phase> = labels.iter().map(|l| l.other()).collect();
    let acc_one = segmentation_accuracy(&labels, &labels).unwrap() == 1.0;
    let acc_zero = segmentation_accuracy(&labels, &flipped).unwrap() == 0.0;
    let identities = dtw_self && dtw_sym && r2_self && acc_one && acc_zero;

    outcome(
        worst_stencil <= 1e-10 && worst_scale <= 1e-12 && identities,
        format!(
            "stencil rel err {worst_stencil:.1e}, scaling rel err {worst_scale:.1e}, identities {}",
            if identities { "exact" } else { "broken" }
        ),
    )
}

fn criterion_6(flights: &[Flight]) -> Outcome {
    let successful: Vec<&Flight> = flights.iter().filter(|f| f.success).collect();
    let train: Vec<&Trajectory> = successful[..100].iter().map(|f| &f.trajectory).collect();
    let mean = mean_trajectory(&train).unwrap();
    let r2: Vec<f64> = successful[100..120]
        .iter()
        .map(|f| r_squared(&f.trajectory, &mean).unwrap())
        .collect();
    let avg = mean_std(&r2).unwrap().0;
    outcome(avg >= 0.6, format!("mean-path R2 {avg:.4} over 20 held-out flights"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let low: Vec<f64> = (0..60).map(|_| rng.random_range(0.0..1.0)).collect();
    let high: Vec<f64> = (0..60).map(|_| rng.random_range(2.0..3.0)).collect();
    let disjoint = ad_k_sample(&[&low, &high]).unwrap().p_value;

    let mut kept = 0;
    for _ in 0..100 {
        let a: Vec<f64> = (0..60).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..60).map(|_| StandardNormal.sample(&mut rng)).collect();
        if ad_k_sample(&[&a, &b]).unwrap().p_value > 0.05 {
            kept += 1;
        }
    }

    let cloud: Vec<Vec3> = (0..100_000)
        .map(|_| {
            let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
            Vec3::new(g(), g(), g())
        })
        .collect();
    let cloud = Trajectory::new(cloud, 1.0).unwrap();
    let fractions = axis_variance_fractions(&[&cloud], VarianceMode::PerAxis).unwrap();
    let worst = fractions.iter().map(|f| (f - 1.0 / 3.0).abs()).fold(0.0, f64::max);

    outcome(
        disjoint < 0.001 && kept >= 90 && worst <= 0.01,
        format!(
            "disjoint p {disjoint:.1e}, same-distribution p > 0.05 in {kept}/100, variance fractions [{:.4}, {:.4}, {:.4}]",
            fractions[0], fractions[1], fractions[2]
        ),
    )
}

fn csv_files(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "csv") {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut outputs = Vec::new();
    for dir in &dirs {
        let cfg = ExperimentConfig {
            runs: 6,
            base_seed: 42,
            out_dir: dir.path().to_path_buf(),
            ..Default::default()
        };
        run_experiment(&cfg).unwrap();
        outputs.push(csv_files(dir.path()));
    }
    let same = outputs[0] == outputs[1];
    outcome(
        same && !outputs[0].is_empty(),
        format!("{} CSV files, identical: {same}", outputs[0].len()),
    )
}

fn main() {
    let cfg = ExperimentConfig::default();
    let calm = scenario(&cfg, Condition::Undisturbed);
    let source = calm.plume.source_position;

    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, o: Outcome| {
        println!(
            "criterion {n} [{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, name, o));
    };

    report(1, "GA against exhaustive search", criterion_1());
    let start = Instant::now();
    let flights = fly_and_segment(&calm, 0..1000, &experiment_ga_defaults());
    let elapsed = start.elapsed();
    report(2, "label recovery", criterion_2(&flights, elapsed));
    report(3, "exploration falls toward the source", criterion_3(&flights, source));
    report(4, "turbulence raises exploration", criterion_4(&cfg));
    report(5, "numerical kernels", criterion_5());
    report(6, "mean-path self-consistency", criterion_6(&flights));
    report(7, "statistics", criterion_7());
    report(8, "reproducible experiment output", criterion_8());

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
